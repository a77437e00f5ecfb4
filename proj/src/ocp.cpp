#include "licon/ocp.hpp"

#include "licon/errors.hpp"
#include "licon/semilinear.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <string>

namespace licon {

OcpProblem OcpProblem::make(Grid2D grid, NonlinearityPtr f, Vector g, double alpha, double lower, double upper) {
    const int n = grid.size();
    OcpProblem p{std::move(grid), std::move(f), std::move(g), alpha, BoxConstraints::uniform(n, lower, upper, alpha)};
    p.check();
    return p;
}

void OcpProblem::check() const {
    require(f != nullptr, "OcpProblem: missing nonlinearity");
    require(alpha > 0.0, "OcpProblem: alpha must be positive");
    require(g.size() == grid.size(), "OcpProblem: target size does not match grid");
    require(box.size() == grid.size(), "OcpProblem: box size does not match grid");
    box.check();
}

KktPoint KktPoint::zero(int n) {
    KktPoint p;
    p.y = p.u = p.p = p.lambda = Vector::Zero(n);
    return p;
}

namespace {

void check_point(const KktPoint& phi, const OcpProblem& prob) {
    const Eigen::Index n = prob.grid.size();
    require(phi.y.size() == n && phi.u.size() == n && phi.p.size() == n && phi.lambda.size() == n,
            "KktPoint: field size does not match grid");
}

KktPoint fill_norms(KktPoint phi, const KktFields& r, const OcpProblem& prob, const HMinusOneNorm& hnorm) {
    phi.r_state = hnorm(r.r1);
    phi.r_adjoint = hnorm(r.r2);
    phi.r_opt = l2_norm(prob.grid, r.r3);
    phi.r_compl = l2_norm(prob.grid, r.r4);
    return phi;
}

IterationRecord ssn_record(int k, const KktPoint& phi, const OcpProblem& prob, double step) {
    const double J = tracking_objective(prob, phi.y, phi.u);
    const Vector G = inactive_indicator(prob.box, phi.u, phi.lambda);
    const int active = static_cast<int>(G.size() - G.sum());
    return {k, "ssn", J, J, phi.total(), step, active, 0.0, 0.0, ""};
}

}  // namespace

KktFields kkt_fields(const KktPoint& phi, const OcpProblem& prob) {
    check_point(phi, prob);
    const Grid2D& grid = prob.grid;
    Vector N, Ny;
    prob.f->evaluate(grid, phi.y, &N, &Ny, nullptr);
    KktFields r;
    r.r1 = -laplacian_apply(grid, phi.y) + N - phi.u;
    r.r2 = -laplacian_apply(grid, phi.p) + Ny.cwiseProduct(phi.p) + phi.y - prob.g;
    r.r3 = -phi.p + phi.lambda + prob.alpha * phi.u;
    r.r4 = complementarity_residual(prob.box, phi.u, phi.lambda);
    return r;
}

KktPoint kkt_residual(KktPoint phi, const OcpProblem& prob) {
    const KktFields r = kkt_fields(phi, prob);
    return fill_norms(std::move(phi), r, prob, HMinusOneNorm(prob.grid));
}

Vector ssn_indicator(const KktPoint& phi, const OcpProblem& prob) {
    check_point(phi, prob);
    return inactive_indicator(prob.box, phi.u, phi.lambda);
}

KktPoint ssn_step(const KktPoint& phi, const OcpProblem& prob) {
    prob.check();
    const Grid2D& grid = prob.grid;
    const int n = grid.size();
    const double alpha = prob.alpha;
    const BoxConstraints& box = prob.box;
    const KktFields r = kkt_fields(phi, prob);
    const Vector G = inactive_indicator(box, phi.u, phi.lambda);
    const Vector w = grid.weights();

    // Eliminate du and dlambda nodewise, leaving
    //   [ S  -W G/alpha ] [dy]   [ W(-r1 + du0) ]
    //   [ W   S         ] [dp] = [ -W r2        ],  S = W(-Delta + f_y).
    const Vector du0 = (G.array() * (-r.r3 + phi.lambda).array() / alpha +
                        (1.0 - G.array()) * r.r4.array() / box.c.array())
                           .matrix();
    const SparseMatrix S = operator_matrix(grid, prob.f->dy(grid, phi.y)).stiffness;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * S.nonZeros() + 4 * n);
    for (int col = 0; col < S.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(S, col); it; ++it) {
            trip.emplace_back(it.row(), it.col(), it.value());
            trip.emplace_back(n + it.row(), n + it.col(), it.value());
        }
    for (int k = 0; k < n; ++k) {
        if (G[k] != 0.0) trip.emplace_back(k, n + k, -w[k] * G[k] / alpha);
        trip.emplace_back(n + k, k, w[k]);
    }
    SparseMatrix K(2 * n, 2 * n);
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();

    Vector rhs(2 * n);
    rhs.head(n) = w.cwiseProduct(-r.r1 + du0);
    rhs.tail(n) = -w.cwiseProduct(r.r2);

    Eigen::SparseLU<SparseMatrix> lu;
    lu.analyzePattern(K);
    lu.factorize(K);
    if (lu.info() != Eigen::Success) throw SolverError("ssn_step: Newton system is singular (" + lu.lastErrorMessage() + ")");
    const Vector sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !sol.allFinite()) throw SolverError("ssn_step: Newton solve failed");
    const Vector dy = sol.head(n);
    const Vector dp = sol.tail(n);

    KktPoint out = phi;
    out.y += dy;
    out.p += dp;
    for (int k = 0; k < n; ++k) {
        if (G[k] != 0.0) {
            const double du = (-r.r3[k] + dp[k] + phi.lambda[k]) / alpha;
            out.u[k] += du;
            out.lambda[k] = 0.0;
        } else {
            const bool upper = phi.lambda[k] + box.c[k] * (phi.u[k] - box.upper[k]) > 0.0;
            const double bound = upper ? box.upper[k] : box.lower[k];
            const double du = bound - phi.u[k];
            out.u[k] = bound;
            out.lambda[k] += -r.r3[k] + dp[k] - alpha * du;
        }
    }
    out.r_state = out.r_adjoint = out.r_opt = out.r_compl = 0.0;
    return out;
}

double tracking_objective(const OcpProblem& prob, const Vector& y, const Vector& u) {
    const double a = l2_norm(prob.grid, y - prob.g);
    const double b = l2_norm(prob.grid, u);
    return 0.5 * a * a + 0.5 * prob.alpha * b * b;
}

ReducedGradient reduced_gradient(const Vector& u, const OcpProblem& prob, const Vector* y0) {
    prob.check();
    const Grid2D& grid = prob.grid;
    require(u.size() == grid.size(), "reduced_gradient: control size does not match grid");
    const Vector start = y0 ? *y0 : Vector::Zero(grid.size());
    StateSolution s = solve_state(grid, *prob.f, u, start, 1e-13, 30);
    ReducedGradient out;
    out.y = std::move(s.y);
    out.p = EllipticSolver(grid, prob.f->dy(grid, out.y)).solve(prob.g - out.y);
    out.gradient = prob.alpha * u - out.p;
    out.objective = tracking_objective(prob, out.y, u);
    return out;
}

PdeReducedModel::PdeReducedModel(const OcpProblem& prob, const OcpParams& params, Vector y0)
    : prob_(prob), params_(params), metric_(prob.grid.mass()), hnorm_(prob.grid) {
    prob_.check();
    if (y0.size()) {
        require(y0.size() == prob.grid.size(), "PdeReducedModel: initial state size does not match grid");
        y_ = std::move(y0);
    } else {
        y_ = Vector::Zero(prob.grid.size());
    }
}

double PdeReducedModel::objective(const Vector& u) {
    require(u.size() == size(), "PdeReducedModel::objective: size mismatch");
    ++state_solves_;
    try {
        StateSolution s = solve_state(prob_.grid, *prob_.f, u, y_, params_.state_tol, params_.state_max_iter);
        if (s.report.residual > params_.state_accept) return std::numeric_limits<double>::infinity();
        y_ = std::move(s.y);
    } catch (const SolverError&) {
        return std::numeric_limits<double>::infinity();
    }
    u_last_ = u;
    have_state_ = true;
    return tracking_objective(prob_, y_, u);
}

void PdeReducedModel::linearize(const Vector& u) {
    if (!have_state_ || u_last_.size() != u.size() || u_last_ != u)
        if (!std::isfinite(objective(u))) throw SolverError("PdeReducedModel::linearize: state not computable");
    const Grid2D& grid = prob_.grid;
    lin_ = std::make_unique<EllipticSolver>(grid, prob_.f->dy(grid, y_));
    u_lin_ = u;
    y_lin_ = y_;
    p_ = lin_->solve(prob_.g - y_lin_);
    grad_ = prob_.alpha * u - p_;
}

Vector PdeReducedModel::hess_apply(const Vector& v) const {
    require(lin_ != nullptr, "PdeReducedModel::hess_apply: call linearize first");
    return lin_->solve(lin_->solve(v)) + prob_.alpha * v;
}

KktPoint PdeReducedModel::point() const {
    require(lin_ != nullptr, "PdeReducedModel::point: call linearize first");
    KktPoint phi;
    phi.y = y_lin_;
    phi.u = u_lin_;
    phi.p = p_;
    phi.lambda = p_ - prob_.alpha * u_lin_;
    return fill_norms(phi, kkt_fields(phi, prob_), prob_, hnorm_);
}

double PdeReducedModel::kkt_residual(const Vector& u, const BoxConstraints& box) const {
    require(u.size() == u_lin_.size() && u == u_lin_, "PdeReducedModel::kkt_residual: not linearized at u");
    require(box.size() == size(), "PdeReducedModel::kkt_residual: box size mismatch");
    return point().total();
}

OcpResult solve_ssn(const OcpProblem& prob, const KktPoint& phi0, const OcpParams& params, double stop_below) {
    prob.check();
    OcpResult res;
    res.point = kkt_residual(phi0, prob);
    res.history.push_back(ssn_record(0, res.point, prob, 0.0));
    int k = 0;
    res.status = "max_iter";
    while (true) {
        if (res.point.total() <= params.sqp.tol) {
            res.status = "converged";
            break;
        }
        if (res.point.total() < stop_below) {
            res.status = "switch";
            break;
        }
        if (k >= params.sqp.max_iter) break;
        KktPoint next;
        try {
            next = ssn_step(res.point, prob);
        } catch (const SolverError& e) {
            res.status = "ssn_failure";
            res.history.back().note = e.what();
            break;
        }
        ++k;
        res.point = kkt_residual(std::move(next), prob);
        res.history.push_back(ssn_record(k, res.point, prob, 1.0));
        if (!std::isfinite(res.point.total())) {
            res.status = "ssn_failure";
            break;
        }
    }
    res.iterations = k;
    return res;
}

namespace {

OcpResult run_sqp_phase(const OcpProblem& prob, const Vector& u0, const Vector& y0, const Vector& lambda0,
                        const OcpParams& params, int used) {
    PdeReducedModel model(prob, params, y0);
    const Vector u = prob.box.project(u0);
    if (!std::isfinite(model.objective(u))) throw SolverError("solve_sqp: state not computable at the initial control");
    model.linearize(u);
    SqpParams sp = params.sqp;
    sp.max_iter = std::max(0, params.sqp.max_iter - used);
    const SqpResult sq = run_sqp(model, prob.box, u, lambda0, sp, used);
    OcpResult res;
    res.point = model.point();
    res.history = sq.history;
    res.status = sq.status;
    res.iterations = used + sq.iterations;
    return res;
}

}  // namespace

OcpResult solve_sqp(const OcpProblem& prob, const Vector& u0, const OcpParams& params) {
    prob.check();
    require(u0.size() == prob.grid.size(), "solve_sqp: control size does not match grid");
    const Vector zero = Vector::Zero(prob.grid.size());
    return run_sqp_phase(prob, u0, zero, zero, params, 0);
}

OcpResult solve_hybrid(const OcpProblem& prob, const OcpParams& params) {
    prob.check();
    const int n = prob.grid.size();
    const double threshold = params.switch_threshold;
    OcpResult ssn = solve_ssn(prob, KktPoint::zero(n), params, threshold > 0.0 ? threshold : 0.0);
    if (ssn.status != "switch") return ssn;
    // SSN iterates need not be feasible on the inactive set; SQP starts from the projection.
    OcpResult sqp = run_sqp_phase(prob, ssn.point.u, ssn.point.y, ssn.point.lambda, params, ssn.iterations);
    if (ssn.iterations > 0) {
        // The SQP start record shares its iteration index with the SSN exit point.
        std::vector<IterationRecord> hist = ssn.history;
        hist.insert(hist.end(), sqp.history.begin() + 1, sqp.history.end());
        sqp.history = std::move(hist);
    }
    return sqp;
}

}  // namespace licon
