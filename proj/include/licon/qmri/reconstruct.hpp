#pragma once

#include "licon/qmri/bloch.hpp"
#include "licon/qmri/kspace.hpp"
#include "licon/qmri/phantom.hpp"
#include "licon/qmri/signal.hpp"
#include "licon/sqp.hpp"

#include <memory>

namespace licon::qmri {

/// Component weights in the order (T1, T2, rho).
struct RegWeights {
    Vector3 alpha0{1e-10, 1e-10, 1e-10};
    Vector3 alpha1{1e-9, 20e-9, 2e-9};
    void check() const;
};

/// Admissible set 0 < T1 < 5000, 0 < T2 < 1800, 0 < rho < 6000 as a closed
/// box shrunk by margin * range; c = c_scale * alpha1 per component.
BoxConstraints qmri_box(int pixels, const RegWeights& w, double c_scale = 1e9, double margin = 1e-9);

/// J(u) = h^2/2 sum_l ||P F (rho s_l(T1, T2)) - g_l||^2
///        + sum_i (alpha0_i/2 ||u_i||_0^2 + alpha1_i/2 |u_i|_1^2).
double qmri_objective(const QmriImage& u, const SignalModel& model, const KSpaceData& data, const RegWeights& w);
/// Riesz representative of J'(u) in the lumped mass of the pixel grid, stacked (T1, T2, rho).
Vector qmri_gradient(const QmriImage& u, const SignalModel& model, const KSpaceData& data, const RegWeights& w);

/// ReducedModel with the Gauss-Newton Hessian W^-1 Q'^* Q' + alpha0 + alpha1 (-Delta_h).
class QmriModel final : public ReducedModel {
public:
    QmriModel(const Grid2D& grid, const SignalModel& model, const KSpaceData& data, const RegWeights& w);
    ~QmriModel() override;

    int size() const override;
    const Vector& metric() const override;
    double objective(const Vector& u) override;
    void linearize(const Vector& u) override;
    const Vector& gradient() const override;
    Vector hess_apply(const Vector& v) const override;
    Vector hess_diagonal() const override;
    double kkt_residual(const Vector& u, const BoxConstraints& box) const override;

private:
    struct State;
    std::unique_ptr<State> st_;
};

/// mu0 = 1, floor 1e-5, r = 0.618, kappa = 1e-3, xi = 0.5, tol 1e-3, 40 iterations.
SqpParams qmri_sqp_defaults();

struct QmriSolveParams {
    SqpParams sqp = qmri_sqp_defaults();
    double c_scale = 1e9;
    double box_margin = 1e-9;
};

struct QmriResult {
    QmriImage image;
    SqpResult sqp;
};

QmriResult solve_qmri_sqp(const KSpaceData& data, const SignalModel& model, const QmriImage& init,
                          const RegWeights& w, const QmriSolveParams& params = {});

/// Matched filter on the zero-filled backprojection: per pixel the atom with
/// the largest normalized correlation, rho = Re<s, x> / ||s||^2, clamped into
/// the box. Atoms with a zero transverse series are skipped.
QmriImage dictionary_match_init(const KSpaceData& data, const Dictionary& dict, double margin = 1e-9);

}  // namespace licon::qmri
