#include "licon/sqp.hpp"

#include "licon/errors.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace licon {

BoxConstraints BoxConstraints::uniform(int n, double lower, double upper, double c) {
    BoxConstraints b{Vector::Constant(n, lower), Vector::Constant(n, upper), Vector::Constant(n, c)};
    b.check();
    return b;
}

void BoxConstraints::check() const {
    require(upper.size() == lower.size() && c.size() == lower.size(), "BoxConstraints: size mismatch");
    require((lower.array() <= upper.array()).all(), "BoxConstraints: lower bound exceeds upper bound");
    require((c.array() > 0.0).all(), "BoxConstraints: c must be positive");
}

Vector BoxConstraints::project(const Vector& u) const {
    require(u.size() == lower.size(), "BoxConstraints::project: size mismatch");
    return u.cwiseMax(lower).cwiseMin(upper);
}

double metric_dot(const Vector& m, const Vector& a, const Vector& b) {
    return (m.array() * a.array() * b.array()).sum();
}

double metric_norm(const Vector& m, const Vector& a) { return std::sqrt(metric_dot(m, a, a)); }

double constraint_violation(const Vector& m, const BoxConstraints& box, const Vector& u) {
    const Vector up = (u - box.upper).cwiseMax(0.0);
    const Vector lo = (u - box.lower).cwiseMin(0.0);
    return metric_norm(m, up) + metric_norm(m, lo);
}

Vector complementarity_residual(const BoxConstraints& box, const Vector& u, const Vector& lambda) {
    const Vector a = (lambda.array() + box.c.array() * (u - box.upper).array()).cwiseMax(0.0);
    const Vector b = (lambda.array() + box.c.array() * (u - box.lower).array()).cwiseMin(0.0);
    return lambda - a - b;
}

Vector inactive_indicator(const BoxConstraints& box, const Vector& u, const Vector& lambda) {
    Vector g(u.size());
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        const double lo = box.c[k] * (box.lower[k] - u[k]);
        const double hi = box.c[k] * (box.upper[k] - u[k]);
        g[k] = (lo <= lambda[k] && lambda[k] <= hi) ? 1.0 : 0.0;
    }
    return g;
}

namespace {

// -1 lower active, +1 upper active, 0 inactive.
std::vector<int> active_pattern(const BoxConstraints& box, const Vector& u, const Vector& delta, const Vector& lambda) {
    std::vector<int> s(u.size(), 0);
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        const double t = u[k] + delta[k];
        if (lambda[k] + box.c[k] * (t - box.upper[k]) > 0.0)
            s[k] = 1;
        else if (lambda[k] + box.c[k] * (t - box.lower[k]) < 0.0)
            s[k] = -1;
    }
    return s;
}

// CG in the metric for P H P x = b on the free nodes (mask = 1).
int masked_cg(const HessApply& hess, const Vector& m, const Vector& mask, const Vector& b, Vector& x, double tol,
              int max_iter, const Vector& precond) {
    auto op = [&](const Vector& v) -> Vector { return hess(v.cwiseProduct(mask)).cwiseProduct(mask); };
    auto prec = [&](const Vector& r) -> Vector {
        return precond.size() ? Vector(r.cwiseQuotient(precond).cwiseProduct(mask)) : r;
    };
    x = x.cwiseProduct(mask);
    const double bnorm = metric_norm(m, b);
    if (bnorm == 0.0) {
        x.setZero();
        return 0;
    }
    Vector r = b - op(x);
    Vector z = prec(r);
    Vector d = z;
    double rz = metric_dot(m, r, z);
    int it = 0;
    while (metric_norm(m, r) > tol * bnorm && it < max_iter) {
        const Vector ad = op(d);
        const double dad = metric_dot(m, d, ad);
        if (!(dad > 0.0)) break;
        const double a = rz / dad;
        x += a * d;
        r -= a * ad;
        z = prec(r);
        const double rz_new = metric_dot(m, r, z);
        d = z + (rz_new / rz) * d;
        rz = rz_new;
        ++it;
    }
    return it;
}

// Clamp components that leave the box by round-off only.
Vector snap_to_box(const BoxConstraints& box, Vector u) {
    const double eps = 8.0 * std::numeric_limits<double>::epsilon();
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        if (u[k] > box.upper[k] && u[k] - box.upper[k] <= eps * (1.0 + std::abs(box.upper[k]))) u[k] = box.upper[k];
        if (u[k] < box.lower[k] && box.lower[k] - u[k] <= eps * (1.0 + std::abs(box.lower[k]))) u[k] = box.lower[k];
    }
    return u;
}

}  // namespace

QpResult solve_qp_pdas(const Vector& grad, const HessApply& hess, const Vector& metric, const BoxConstraints& box,
                       const Vector& u, const Vector& delta0, const Vector& lambda0, const PdasOptions& opts,
                       const InnerStop& stop, const Vector& precond) {
    const Eigen::Index n = u.size();
    require(grad.size() == n && metric.size() == n && box.size() == n, "solve_qp_pdas: size mismatch");
    require(delta0.size() == n && lambda0.size() == n, "solve_qp_pdas: initial guess size mismatch");
    require(opts.max_iter > 0, "solve_qp_pdas: max_iter must be positive");

    QpResult res;
    res.delta = delta0;
    res.lambda = lambda0;
    std::vector<int> sets = active_pattern(box, u, res.delta, res.lambda);
    Vector cg_guess = delta0;

    for (int it = 1; it <= opts.max_iter; ++it) {
        Vector mask(n), delta_a = Vector::Zero(n);
        int active = 0;
        for (Eigen::Index k = 0; k < n; ++k) {
            mask[k] = sets[k] == 0 ? 1.0 : 0.0;
            if (sets[k] > 0) delta_a[k] = box.upper[k] - u[k];
            if (sets[k] < 0) delta_a[k] = box.lower[k] - u[k];
            active += sets[k] != 0;
        }
        Vector delta = delta_a;
        if (active < n) {
            const Vector rhs = (-(grad + hess(delta_a))).cwiseProduct(mask);
            Vector x = cg_guess;
            res.cg_iterations += masked_cg(hess, metric, mask, rhs, x, opts.cg_tol, opts.cg_max_iter, precond);
            delta += x.cwiseProduct(mask);
        }
        // Active components land exactly on the bound.
        const Vector t = grad + hess(delta);
        Vector lambda = Vector::Zero(n);
        for (Eigen::Index k = 0; k < n; ++k)
            if (sets[k] != 0) lambda[k] = -t[k];
        res.delta = delta;
        res.lambda = lambda;
        res.iterations = it;
        res.active = active;
        cg_guess = delta;

        const std::vector<int> next = active_pattern(box, u, delta, lambda);
        if (next == sets) {
            res.status = "sets_coincide";
            return res;
        }
        if (stop && stop(delta, lambda)) {
            res.status = "early_stop";
            return res;
        }
        sets = next;
    }
    res.status = "max_iter";
    return res;
}

bool sqp_inner_stop(const Vector& metric, const Vector& delta, const Vector& grad, const Vector& hess_delta,
                    double psi0, double psi1, double beta, double xi) {
    const double lhs = metric_dot(metric, grad, delta) + beta * (psi1 - psi0);
    const double curv = metric_dot(metric, hess_delta, delta);
    return lhs <= -xi * curv && psi1 <= (1.0 - xi) * psi0;
}

LineSearchResult armijo_search(const std::function<double(double)>& phi, double phi0, double slope, double mu0,
                               double r, double kappa, double floor, double noise) {
    require(r > 0.0 && r < 1.0, "armijo_search: r must lie in (0, 1)");
    require(kappa > 0.0 && kappa < 1.0, "armijo_search: kappa must lie in (0, 1)");
    LineSearchResult out;
    double mu = mu0;
    while (mu >= floor) {
        const double v = phi(mu);
        ++out.trials;
        if (std::isfinite(v)) {
            const bool armijo = v - phi0 <= kappa * mu * slope;
            const bool flat = std::abs(slope) <= noise && v - phi0 <= noise;
            if (armijo || flat) {
                out.mu = mu;
                out.phi = v;
                out.ok = true;
                out.noise_accept = !armijo;
                return out;
            }
        }
        mu *= r;
    }
    out.mu = mu;
    return out;
}

void SqpParams::check() const {
    require(r > 0.0 && r < 1.0, "SqpParams: r must lie in (0, 1)");
    require(kappa > 0.0 && kappa < 1.0, "SqpParams: kappa must lie in (0, 1)");
    require(zeta > 1.0, "SqpParams: zeta must exceed 1");
    require(xi > 0.0 && xi < 1.0, "SqpParams: xi must lie in (0, 1)");
    require(mu0 > 0.0 && step_floor > 0.0, "SqpParams: step sizes must be positive");
    require(tol >= 0.0 && max_iter >= 0, "SqpParams: invalid termination settings");
    require(merit_noise >= 0.0, "SqpParams: merit_noise must be nonnegative");
}

SqpResult run_sqp(ReducedModel& model, const BoxConstraints& box, const Vector& u0, const Vector& lambda0,
                  const SqpParams& params, int first_index) {
    params.check();
    box.check();
    const int n = model.size();
    require(box.size() == n && u0.size() == n && lambda0.size() == n, "run_sqp: size mismatch");
    const Vector& m = model.metric();

    SqpResult res;
    res.u = box.project(u0);
    res.lambda = lambda0;
    double beta = params.beta0 > 0.0 ? params.beta0 : metric_norm(m, lambda0) + 1.0;

    double J = model.objective(res.u);
    if (!std::isfinite(J)) throw SolverError("run_sqp: state not computable at the initial control");
    model.linearize(res.u);
    res.residual = model.kkt_residual(res.u, box);

    auto record = [&](int k, double merit, double step, int active, const std::string& note) {
        res.history.push_back({first_index + k, "sqp", J, merit, res.residual, step, active, beta, 0.0, note});
    };
    record(0, J + beta * constraint_violation(m, box, res.u), 0.0, 0, "start");

    Vector delta = Vector::Zero(n);
    const HessApply hess = [&](const Vector& v) { return model.hess_apply(v); };
    int k = 0;
    res.status = "max_iter";
    while (true) {
        if (res.residual <= params.tol) {
            res.status = "converged";
            break;
        }
        if (k >= params.max_iter) break;
        ++k;

        const Vector& g = model.gradient();
        const double psi0 = constraint_violation(m, box, res.u);
        const double tiny = 1e-15 * (1.0 + metric_norm(m, res.u));
        const InnerStop stop = [&](const Vector& d, const Vector& lam) {
            // A zero sweep only certifies stationarity once the sets have settled.
            if (metric_norm(m, d) <= tiny) return false;
            const double b = std::max(beta, params.zeta * metric_norm(m, lam));
            // On exit of a pdAS sweep g + H d + lam = 0 up to the CG tolerance.
            const Vector hd = -(g + lam);
            return sqp_inner_stop(m, d, g, hd, psi0, constraint_violation(m, box, res.u + d), b, params.xi);
        };
        // Warm start: previous direction is rarely useful after the update.
        delta.setZero();
        const QpResult qp = solve_qp_pdas(g, hess, m, box, res.u, delta, res.lambda, params.pdas, stop,
                                          model.hess_diagonal());
        delta = qp.delta;
        res.lambda = qp.lambda;
        beta = std::max(beta, params.zeta * metric_norm(m, qp.lambda));

        if (metric_norm(m, delta) <= tiny) {
            res.status = qp.ok() ? "stationary" : "inner_failure";
            record(k, J + beta * psi0, 0.0, qp.active, qp.status);
            break;
        }

        const double psi1 = constraint_violation(m, box, res.u + delta);
        const double slope = metric_dot(m, g, delta) + beta * (psi1 - psi0);
        const double phi0 = J + beta * psi0;
        const Vector u_base = res.u;
        auto trial = [&](double mu) { return snap_to_box(box, u_base + mu * delta); };
        auto phi = [&](double mu) {
            const Vector t = trial(mu);
            return model.objective(t) + beta * constraint_violation(m, box, t);
        };
        const double noise = params.merit_noise * (1.0 + std::abs(phi0));
        const LineSearchResult ls =
            armijo_search(phi, phi0, slope, params.mu0, params.r, params.kappa, params.step_floor, noise);
        if (!ls.ok) {
            // Restore the cached state of the base point.
            model.objective(u_base);
            model.linearize(u_base);
            res.status = "step_floor";
            record(k, phi0, ls.mu, qp.active, qp.status);
            break;
        }
        // The model caches the state of the last trial, which is the accepted one.
        res.u = trial(ls.mu);
        J = ls.phi - beta * constraint_violation(m, box, res.u);
        model.linearize(res.u);
        res.residual = model.kkt_residual(res.u, box);
        record(k, ls.phi, ls.mu, qp.active, ls.noise_accept ? qp.status + ";noise_accept" : qp.status);
        res.history.back().decrease = ls.phi - phi0;
    }
    res.iterations = k;
    return res;
}

void write_history_csv(const std::string& path, const std::vector<IterationRecord>& history) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_history_csv: cannot open " + path);
    out << "iteration,method,objective,merit,residual,step,active,beta,note\n" << std::setprecision(12);
    for (const IterationRecord& r : history)
        out << r.iteration << ',' << r.method << ',' << r.objective << ',' << r.merit << ',' << r.residual << ','
            << r.step << ',' << r.active << ',' << r.beta << ',' << r.note << '\n';
}

}  // namespace licon
