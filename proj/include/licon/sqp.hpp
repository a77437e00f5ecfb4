#pragma once

#include "licon/grid.hpp"

#include <functional>
#include <string>
#include <vector>

namespace licon {

/// lower <= u <= upper nodewise; c > 0 scales the complementarity function.
struct BoxConstraints {
    Vector lower;
    Vector upper;
    Vector c;

    static BoxConstraints uniform(int n, double lower, double upper, double c);
    int size() const noexcept { return static_cast<int>(lower.size()); }
    void check() const;
    Vector project(const Vector& u) const;
};

/// Weighted inner product sum_k m_k a_k b_k.
double metric_dot(const Vector& m, const Vector& a, const Vector& b);
double metric_norm(const Vector& m, const Vector& a);

/// ||(u - upper)^+||_M + ||(u - lower)^-||_M.
double constraint_violation(const Vector& m, const BoxConstraints& box, const Vector& u);

/// lambda - max(0, lambda + c(u - upper)) - min(0, lambda + c(u - lower)).
Vector complementarity_residual(const BoxConstraints& box, const Vector& u, const Vector& lambda);

/// 1 where c(lower - u) <= lambda <= c(upper - u), else 0.
Vector inactive_indicator(const BoxConstraints& box, const Vector& u, const Vector& lambda);

/// Reduced objective u -> J(u) in the inner product defined by metric().
/// objective() may cache the state it solves; linearize() must follow an
/// objective() call at the same u.
class ReducedModel {
public:
    virtual ~ReducedModel() = default;
    virtual int size() const = 0;
    virtual const Vector& metric() const = 0;
    /// +infinity if the state cannot be computed at u.
    virtual double objective(const Vector& u) = 0;
    virtual void linearize(const Vector& u) = 0;
    /// Riesz representative of J'(u) in the metric.
    virtual const Vector& gradient() const = 0;
    /// Hessian approximation, self-adjoint and positive in the metric.
    virtual Vector hess_apply(const Vector& v) const = 0;
    /// Optional diagonal preconditioner for the Hessian (empty: none).
    virtual Vector hess_diagonal() const { return {}; }
    /// Summed first-order residual at the linearized point.
    virtual double kkt_residual(const Vector& u, const BoxConstraints& box) const = 0;
};

using HessApply = std::function<Vector(const Vector&)>;
/// Early-stop hook evaluated after each pdAS iteration.
using InnerStop = std::function<bool(const Vector& delta, const Vector& lambda)>;

struct PdasOptions {
    int max_iter = 100;
    double cg_tol = 1e-10;
    int cg_max_iter = 2000;
};

struct QpResult {
    Vector delta;
    Vector lambda;
    int iterations = 0;
    int cg_iterations = 0;
    int active = 0;
    /// sets_coincide, early_stop or max_iter.
    std::string status;
    bool ok() const noexcept { return status != "max_iter"; }
};

/// Primal-dual active set method for
///   min <g, d>_M + 1/2 <H d, d>_M   s.t.  lower <= u + d <= upper.
/// The inactive-set systems are solved by CG in the metric.
QpResult solve_qp_pdas(const Vector& grad, const HessApply& hess, const Vector& metric, const BoxConstraints& box,
                       const Vector& u, const Vector& delta0, const Vector& lambda0, const PdasOptions& opts = {},
                       const InnerStop& stop = nullptr, const Vector& precond = {});

/// Sufficient-decrease test for an inexact QP solution.
bool sqp_inner_stop(const Vector& metric, const Vector& delta, const Vector& grad, const Vector& hess_delta,
                    double psi0, double psi1, double beta, double xi);

struct LineSearchResult {
    double mu = 0.0;
    double phi = 0.0;
    int trials = 0;
    bool ok = false;
    /// Accepted through the round-off clause.
    bool noise_accept = false;
};

/// Backtracking from mu0 by factor r until
///   phi(mu) - phi0 <= kappa * mu * slope;
/// fails once the next trial step would drop below `floor`. If |slope| is
/// below `noise`, a trial with phi(mu) - phi0 <= noise is also accepted.
LineSearchResult armijo_search(const std::function<double(double)>& phi, double phi0, double slope, double mu0,
                               double r, double kappa, double floor, double noise = 0.0);

struct SqpParams {
    double mu0 = 1.0;
    double step_floor = 1e-5;
    double r = 2.0 / 3.0;
    double kappa = 1e-3;
    double zeta = 2.0;
    double xi = 0.9;
    /// Non-positive: ||lambda0|| + 1.
    double beta0 = -1.0;
    /// Relative round-off level of merit values (see armijo_search).
    double merit_noise = 1e-13;
    double tol = 1e-10;
    int max_iter = 30;
    PdasOptions pdas;
    void check() const;
};

struct IterationRecord {
    int iteration = 0;
    std::string method;
    double objective = 0.0;
    double merit = 0.0;
    double residual = 0.0;
    double step = 0.0;
    int active = 0;
    double beta = 0.0;
    /// Phi(mu) - Phi(0) of the accepted step.
    double decrease = 0.0;
    std::string note;
};

struct SqpResult {
    Vector u;
    Vector lambda;
    std::vector<IterationRecord> history;
    /// converged, stationary, step_floor, inner_failure, max_iter.
    std::string status;
    double residual = 0.0;
    int iterations = 0;
    bool converged() const noexcept { return status == "converged"; }
};

/// Reduced SQP with pdAS subproblems and merit-function line search.
/// `first_index` offsets the iteration numbers in the history.
SqpResult run_sqp(ReducedModel& model, const BoxConstraints& box, const Vector& u0, const Vector& lambda0,
                  const SqpParams& params, int first_index = 0);

/// History CSV: iteration, method, objective, merit, residual, step, active, beta, note.
void write_history_csv(const std::string& path, const std::vector<IterationRecord>& history);

}  // namespace licon
