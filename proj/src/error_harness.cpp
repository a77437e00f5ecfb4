#include "licon/error_harness.hpp"

#include "licon/errors.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>

namespace licon {

ErrorBudget estimate_budget(const ObservationMap& exact, const ObservationMap& surrogate,
                            const std::vector<Vector>& controls, const std::vector<Vector>& probes,
                            const ErrorMetrics& metrics) {
    require(!controls.empty(), "estimate_budget: no control samples");
    require(exact.value && surrogate.value, "estimate_budget: missing operator");
    const Vector& mu = metrics.control;
    const Vector& mh = metrics.observation;
    ErrorBudget b;
    std::vector<std::vector<Vector>> dq(controls.size());
    for (std::size_t i = 0; i < controls.size(); ++i) {
        const Vector& u = controls[i];
        require(u.size() == mu.size(), "estimate_budget: control size does not match metric");
        const Vector qe = exact.value(u);
        require(qe.size() == mh.size(), "estimate_budget: observation size does not match metric");
        b.eps_n = std::max(b.eps_n, metric_norm(mh, qe - surrogate.value(u)));
        if (!exact.derivative) continue;
        for (const Vector& v : probes) {
            const double vn = metric_norm(mu, v);
            require(vn > 0.0, "estimate_budget: zero probe direction");
            const Vector de = exact.derivative(u, v);
            dq[i].push_back(de);
            b.L0 = std::max(b.L0, metric_norm(mh, de) / vn);
            if (surrogate.derivative)
                b.eta_n = std::max(b.eta_n, metric_norm(mh, de - surrogate.derivative(u, v)) / vn);
        }
    }
    if (exact.derivative)
        for (std::size_t i = 0; i < controls.size(); ++i)
            for (std::size_t j = i + 1; j < controls.size(); ++j) {
                const double du = metric_norm(mu, controls[i] - controls[j]);
                if (du == 0.0) continue;
                for (std::size_t p = 0; p < probes.size(); ++p)
                    b.L1 = std::max(b.L1, metric_norm(mh, dq[i][p] - dq[j][p]) / (du * metric_norm(mu, probes[p])));
            }
    return b;
}

double zero_residual_bound(double eps, double alpha) {
    require(alpha > 0.0 && eps >= 0.0, "zero_residual_bound: invalid arguments");
    return eps * std::sqrt(3.0 / alpha);
}

double residual_bound(double eps, double alpha, double L1, double residual) {
    require(alpha > 0.0 && eps >= 0.0 && L1 >= 0.0 && residual >= 0.0, "residual_bound: invalid arguments");
    const double gap = alpha - L1 * residual;
    if (gap <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(3.0 / gap) * std::sqrt(eps * eps + 2.0 * residual * residual);
}

RateReport verify_rate(const std::vector<std::pair<double, double>>& pairs, double alpha, RateMode mode,
                       double margin, double L1, double residual) {
    require(pairs.size() >= 3, "verify_rate: need at least 3 (eps, error) pairs");
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& [eps, err] : pairs) {
        require(eps >= 0.0 && err >= 0.0, "verify_rate: negative entry");
        if (eps > 0.0) {
            lo = std::min(lo, eps);
            hi = std::max(hi, eps);
        }
    }
    require(hi > 0.0 && hi >= 10.0 * lo, "verify_rate: eps values must span at least one decade");

    RateReport rep;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const auto& [eps, err] : pairs) {
        RatePoint p;
        p.eps = eps;
        p.error = err;
        p.bound = mode == RateMode::perfect_matching ? zero_residual_bound(eps, alpha)
                                                      : residual_bound(eps, alpha, L1, residual);
        p.pass = std::isfinite(p.bound) && err <= p.bound * (1.0 + margin);
        rep.bound_holds = rep.bound_holds && p.pass;
        rep.points.push_back(p);
        if (eps > 0.0 && err > 0.0) {
            const double x = std::log10(eps), y = std::log10(err);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++m;
        }
    }
    if (m >= 2) {
        const double den = m * sxx - sx * sx;
        rep.slope = (m * sxy - sx * sy) / den;
        rep.intercept = (sy - rep.slope * sx) / m;
    } else {
        rep.slope = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

void write_rate_csv(const std::string& path, const RateReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_rate_csv: cannot open " + path);
    out << "eps_n,eta_n,control_error,bound,pass\n" << std::setprecision(12);
    for (const RatePoint& p : report.points)
        out << p.eps << ',' << p.eta << ',' << p.error << ',' << p.bound << ',' << (p.pass ? "pass" : "fail") << '\n';
}

LinearQuadraticFamily LinearQuadraticFamily::make(int n, double alpha, std::uint64_t seed) {
    require(n >= 3, "LinearQuadraticFamily: need at least 3 unknowns");
    require(alpha > 0.0, "LinearQuadraticFamily: alpha must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    LinearQuadraticFamily f;
    f.alpha = alpha;
    f.K = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) f.K(i, j) += 0.3 * nd(rng) / std::sqrt(double(n));
    f.b = Vector(n);
    f.w = Vector(n);
    f.a = Vector(n);
    for (int i = 0; i < n; ++i) {
        f.b[i] = nd(rng);
        f.w[i] = nd(rng);
        f.a[i] = nd(rng);
    }
    f.w.normalize();
    f.a.normalize();

    // A third of the components sit on a positive lower bound, a third on a
    // negative upper bound, the rest at zero inside [-1, 1]. With g = Q(ubar)
    // the multiplier -alpha ubar has the sign each active bound requires.
    f.box = BoxConstraints::uniform(n, -1.0, 1.0, alpha);
    f.ubar = Vector::Zero(n);
    const int third = n / 3;
    for (int i = 0; i < third; ++i) {
        f.box.lower[i] = 0.5;
        f.box.upper[i] = 2.0;
        f.ubar[i] = 0.5;
        f.box.lower[third + i] = -2.0;
        f.box.upper[third + i] = -0.5;
        f.ubar[third + i] = -0.5;
    }
    f.g = f.K * f.ubar + f.b;
    return f;
}

ObservationMap LinearQuadraticFamily::exact() const {
    return {[this](const Vector& u) -> Vector { return K * u + b; },
            [this](const Vector&, const Vector& v) -> Vector { return K * v; }};
}

ObservationMap LinearQuadraticFamily::surrogate(double eps) const {
    return {[this, eps](const Vector& u) -> Vector { return K * u + b + eps * std::cos(a.dot(u)) * w; },
            [this, eps](const Vector& u, const Vector& v) -> Vector {
                return K * v - eps * std::sin(a.dot(u)) * a.dot(v) * w;
            }};
}

namespace {

class FamilyModel final : public ReducedModel {
public:
    FamilyModel(const LinearQuadraticFamily& f, double eps) : f_(f), eps_(eps), m_(Vector::Ones(f.b.size())) {}
    int size() const override { return static_cast<int>(f_.b.size()); }
    const Vector& metric() const override { return m_; }
    double objective(const Vector& u) override {
        const Vector r = q(u) - f_.g;
        return 0.5 * r.squaredNorm() + 0.5 * f_.alpha * u.squaredNorm();
    }
    void linearize(const Vector& u) override {
        J_ = f_.K - eps_ * std::sin(f_.a.dot(u)) * f_.w * f_.a.transpose();
        grad_ = J_.transpose() * (q(u) - f_.g) + f_.alpha * u;
    }
    const Vector& gradient() const override { return grad_; }
    Vector hess_apply(const Vector& v) const override { return J_.transpose() * (J_ * v) + f_.alpha * v; }
    double kkt_residual(const Vector& u, const BoxConstraints& box) const override {
        return complementarity_residual(box, u, -grad_).norm();
    }

private:
    Vector q(const Vector& u) const { return f_.K * u + f_.b + eps_ * std::cos(f_.a.dot(u)) * f_.w; }

    const LinearQuadraticFamily& f_;
    double eps_;
    Vector m_;
    Eigen::MatrixXd J_;
    Vector grad_;
};

}  // namespace

Vector LinearQuadraticFamily::solve_surrogate(double eps, const SqpParams& params) const {
    FamilyModel model(*this, eps);
    SqpParams p = params;
    p.tol = std::min(p.tol, 1e-13);
    p.max_iter = std::max(p.max_iter, 50);
    const SqpResult r = run_sqp(model, box, box.project(Vector::Zero(b.size())), Vector::Zero(b.size()), p);
    if (!r.converged() && r.status != "stationary")
        throw SolverError("LinearQuadraticFamily::solve_surrogate: SQP ended with status " + r.status);
    return r.u;
}

}  // namespace licon
