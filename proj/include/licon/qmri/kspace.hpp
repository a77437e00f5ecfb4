#pragma once

#include "licon/qmri/fourier.hpp"
#include "licon/qmri/phantom.hpp"
#include "licon/qmri/signal.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace licon::qmri {

using Mask = std::vector<unsigned char>;

/// Column-wise k-space frames (pixels x L) with either one sampling mask
/// shared by all frames or one mask per frame. Unsampled entries are zero.
struct KSpaceData {
    int nx = 0;
    int ny = 0;
    CMatrix frames;
    std::vector<Mask> masks;
    double sigma = 0.0;
    std::uint64_t seed = 0;

    int size() const noexcept { return nx * ny; }
    const Mask& mask(int frame) const { return masks.size() == 1 ? masks.front() : masks.at(frame); }
    bool fully_sampled() const;
    /// Sampled entries summed over frames.
    long long samples() const;
    void check() const;
};

Mask full_mask(int nx, int ny);

/// Cartesian row mask sampling round(density * ny) phase-encode rows: the
/// central low-|k_y| quarter of them, the rest drawn uniformly by `seed`.
/// Rows follow FFT ordering (k_y = j for j < ny/2, j - ny otherwise).
Mask cartesian_row_mask(int nx, int ny, double density, std::uint64_t seed);
/// One mask per frame, frame l drawn with seed + l; `shared` repeats frame 0.
std::vector<Mask> cartesian_row_masks(int nx, int ny, double density, std::uint64_t seed, int frames, bool shared);

/// Masked transverse k-space rho * s(T1, T2) frame by frame.
/// Zeroes unsampled entries of K in place.
void apply_masks(CMatrix& K, const std::vector<Mask>& masks);

CMatrix simulate_frames(const QmriImage& img, const SignalModel& model, const UnitaryDft2& dft,
                        const std::vector<Mask>& masks);

KSpaceData simulate_kspace(const QmriImage& img, const SignalModel& model, const std::vector<Mask>& masks);

/// Adds N(0, sigma^2) to the real and imaginary parts of sampled entries.
void add_noise(KSpaceData& data, double sigma, std::uint64_t seed);

/// stem.bin holds complex64 little-endian frames (frame-major, row-major
/// pixels), stem.json the sidecar, stem_mask.csv the masks as ny rows of nx
/// per mask, stacked.
void save_kspace(const std::string& stem, const KSpaceData& data);
KSpaceData load_kspace(const std::string& stem);

}  // namespace licon::qmri
