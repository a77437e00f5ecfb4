#pragma once

#include "licon/grid.hpp"
#include "licon/nonlinearity.hpp"
#include "licon/sqp.hpp"

#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace licon {

/// min 1/2 ||y - g||^2 + alpha/2 ||u||^2  s.t.  -Delta y + f(x, y) = u, box on u.
struct OcpProblem {
    Grid2D grid;
    NonlinearityPtr f;
    Vector g;
    double alpha = 1.0;
    BoxConstraints box;

    /// Box with c = alpha on every node.
    static OcpProblem make(Grid2D grid, NonlinearityPtr f, Vector g, double alpha, double lower, double upper);
    void check() const;
};

/// phi = (y, u, p, lambda) together with the norms of the four KKT residuals
/// (H^-1, H^-1, L^2, L^2).
struct KktPoint {
    Vector y, u, p, lambda;
    double r_state = 0.0;
    double r_adjoint = 0.0;
    double r_opt = 0.0;
    double r_compl = 0.0;

    static KktPoint zero(int n);
    double total() const noexcept { return r_state + r_adjoint + r_opt + r_compl; }
};

struct KktFields {
    Vector r1, r2, r3, r4;
};

KktFields kkt_fields(const KktPoint& phi, const OcpProblem& prob);
/// Returns phi with the residual norms filled in.
KktPoint kkt_residual(KktPoint phi, const OcpProblem& prob);

/// 1 on nodes with c(lower - u) <= lambda <= c(upper - u).
Vector ssn_indicator(const KktPoint& phi, const OcpProblem& prob);

/// One semismooth Newton step with the simplified Jacobian (second derivative
/// of f times p dropped). Active controls are placed exactly on their bound.
KktPoint ssn_step(const KktPoint& phi, const OcpProblem& prob);

struct ReducedGradient {
    Vector gradient;
    Vector y;
    Vector p;
    double objective = 0.0;
};

/// alpha u - p with the state at u and the adjoint -Delta p + f_y p = g - y.
ReducedGradient reduced_gradient(const Vector& u, const OcpProblem& prob, const Vector* y0 = nullptr);
double tracking_objective(const OcpProblem& prob, const Vector& y, const Vector& u);

struct OcpParams {
    /// tol and max_iter are totals over all phases.
    SqpParams sqp;
    /// Summed residual below which the hybrid driver leaves SSN for SQP.
    double switch_threshold = 5.0;
    double state_tol = 1e-13;
    int state_max_iter = 15;
    /// Trial controls whose state residual stays above this are rejected.
    double state_accept = 1e-10;
};

/// Reduced problem u -> J(S(u), u) with warm-started state solves and the
/// Gauss-Newton Hessian Q'(u)* Q'(u) + alpha Id.
class PdeReducedModel : public ReducedModel {
public:
    PdeReducedModel(const OcpProblem& prob, const OcpParams& params, Vector y0 = {});

    int size() const override { return prob_.grid.size(); }
    const Vector& metric() const override { return metric_; }
    double objective(const Vector& u) override;
    void linearize(const Vector& u) override;
    const Vector& gradient() const override { return grad_; }
    Vector hess_apply(const Vector& v) const override;
    double kkt_residual(const Vector& u, const BoxConstraints& box) const override;

    /// State, adjoint and multiplier p - alpha u at the linearized point.
    KktPoint point() const;
    int state_solves() const noexcept { return state_solves_; }

private:
    const OcpProblem& prob_;
    OcpParams params_;
    Vector metric_;
    Vector y_;
    Vector u_last_;
    bool have_state_ = false;
    Vector u_lin_, y_lin_, p_, grad_;
    std::unique_ptr<EllipticSolver> lin_;
    HMinusOneNorm hnorm_;
    int state_solves_ = 0;
};

struct OcpResult {
    KktPoint point;
    std::vector<IterationRecord> history;
    /// converged, switch, max_iter, step_floor, stationary, ssn_failure.
    std::string status;
    int iterations = 0;
    bool converged() const noexcept { return status == "converged"; }
};

/// SSN iterations from phi0 until the summed residual is below params.sqp.tol,
/// below `stop_below` (status "switch"), or params.sqp.max_iter steps.
OcpResult solve_ssn(const OcpProblem& prob, const KktPoint& phi0, const OcpParams& params,
                    double stop_below = 0.0);
OcpResult solve_sqp(const OcpProblem& prob, const Vector& u0, const OcpParams& params);
/// SSN from phi = 0 until the residual drops below params.switch_threshold,
/// then SQP; threshold 0 runs SSN only, infinity SQP only.
OcpResult solve_hybrid(const OcpProblem& prob, const OcpParams& params);

}  // namespace licon
