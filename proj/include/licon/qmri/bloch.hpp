#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace licon::qmri {

using Vector3 = Eigen::Vector3d;

/// Inversion-recovery bSSFP protocol. Readout l applies the flip
/// (-1)^l flips[l-1] about x, then free evolution over TR: precession by
/// `phase` about z, relaxation and recovery towards m_e.
struct SequenceSpec {
    int L = 20;
    double TR = 8.0;  // ms
    std::vector<double> flips;  // radians, size L
    double phase = 0.0;  // rad per TR
    Vector3 M0{0.0, 0.0, -1.0};
    double m_e = 1.0;

    /// L = 20, TR = 8 ms, constant flips pi/4, phase 3 pi/4.
    static SequenceSpec standard();
    void check() const;
};

/// Per-readout magnetization, L x 3.
using Series = Eigen::Matrix<double, Eigen::Dynamic, 3>;

struct SeriesDerivative {
    Series dT1;
    Series dT2;
};

/// T1, T2 > 0 (ms).
Series bloch_series(double T1, double T2, const SequenceSpec& seq);
SeriesDerivative bloch_derivative(double T1, double T2, const SequenceSpec& seq);

/// Same recurrence with the continuous extension E = 0 at T = 0; T >= 0.
/// Either derivative pointer may be null.
Series bloch_series_extended(double T1, double T2, const SequenceSpec& seq, Series* dT1 = nullptr,
                             Series* dT2 = nullptr);

/// Range values of the MRF grids: lo:step:hi in the usual colon notation.
std::vector<double> colon_range(double lo, double step, double hi);

struct Dictionary {
    std::vector<double> T1;
    std::vector<double> T2;
    std::vector<Series> series;

    int size() const noexcept { return static_cast<int>(series.size()); }
};

/// All pairs of the two grids (T = 0 included), T1-major.
Dictionary build_dictionary(const std::vector<double>& T1_grid, const std::vector<double>& T2_grid,
                            const SequenceSpec& seq);

/// small: 0:400:5000 x 0:100:1800; medium: 0:200:5000 x 0:50:1800; large: 0:50:5000 x 0:20:1800.
Dictionary standard_dictionary(const std::string& size, const SequenceSpec& seq);

}  // namespace licon::qmri
