#pragma once

#include "licon/grid.hpp"
#include "licon/mlp.hpp"
#include "licon/qmri/bloch.hpp"
#include "licon/qmri/fourier.hpp"
#include "licon/train.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace licon::qmri {

/// Transverse signal Mx + i My per pixel and readout for rho = 1.
class SignalModel {
public:
    virtual ~SignalModel() = default;
    virtual int frames() const = 0;
    /// s, dT1, dT2 are (pixels x frames); derivative pointers may be null.
    virtual void evaluate(const Vector& T1, const Vector& T2, CMatrix& s, CMatrix* dT1, CMatrix* dT2) const = 0;
};

class ExactBlochModel final : public SignalModel {
public:
    explicit ExactBlochModel(SequenceSpec seq);
    const SequenceSpec& sequence() const noexcept { return seq_; }
    int frames() const override { return seq_.L; }
    void evaluate(const Vector& T1, const Vector& T2, CMatrix& s, CMatrix* dT1, CMatrix* dT2) const override;

private:
    SequenceSpec seq_;
};

/// Hidden widths of the sub-network tags "1-L-S" ... "3-L-L".
std::vector<int> drnn_hidden_widths(const std::string& arch);
/// logsig on every hidden layer except softmax on the last one.
std::vector<Activation> drnn_activations(int hidden_layers);

/// Direct residual network: readout l is M0 + N_l(T1, T2), each N_l a
/// scaled 2 -> ... -> 2 network for the transverse pair.
class Drnn final : public SignalModel {
public:
    Drnn(std::vector<ScaledNet> nets, Vector3 M0);
    int frames() const override { return static_cast<int>(nets_.size()); }
    const std::vector<ScaledNet>& nets() const noexcept { return nets_; }
    void evaluate(const Vector& T1, const Vector& T2, CMatrix& s, CMatrix* dT1, CMatrix* dT2) const override;

    void save(const std::string& path) const;
    static Drnn load(const std::string& path);

private:
    std::vector<ScaledNet> nets_;
    Vector3 M0_;
};

struct DrnnReport {
    std::vector<TrainReport> subnets;
    /// Largest train MSE over sub-networks (scaled units).
    double worst_train_mse = 0.0;
};

/// Trains one sub-network per readout on the dictionary series; sub-network
/// l uses seed + l. Atoms with T1 = 0 or T2 = 0 lie outside the admissible
/// set and are left out.
Drnn train_drnn(const Dictionary& dict, const Vector3& M0, const std::vector<int>& hidden, std::uint64_t seed,
                const TrainOptions& opts = {}, DrnnReport* report = nullptr);

/// ||M_hat - M|| / ||M|| over the transverse series of the given parameter pairs.
double series_relative_error(const SignalModel& model, const SignalModel& reference, const Vector& T1,
                             const Vector& T2);

}  // namespace licon::qmri
