#include "doctest.h"

#include "licon/errors.hpp"
#include "licon/sqp.hpp"

#include <cmath>
#include <random>

using namespace licon;
using Eigen::MatrixXd;

namespace {

// Dense M-selfadjoint positive Hessian M^-1 A with A = I + B B^T / (2n),
// a diagonal plus a smaller coupling like the Gauss-Newton operator.
struct DenseQp {
    MatrixXd A;
    Vector m;
    HessApply hess() const {
        return [this](const Vector& v) -> Vector { return (A * v).cwiseQuotient(m); };
    }
};

DenseQp random_qp(int n, std::mt19937_64& rng, bool uniform_metric) {
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.5, 2.0);
    MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B(i, j) = nd(rng);
    DenseQp q;
    q.A = MatrixXd::Identity(n, n) + B * B.transpose() / (2.0 * n);
    q.m = Vector::Ones(n);
    if (!uniform_metric)
        for (int i = 0; i < n; ++i) q.m[i] = ud(rng);
    return q;
}

Vector random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Vector v(n);
    for (int k = 0; k < n; ++k) v[k] = nd(rng);
    return v;
}

// Brute force over all lower / free / upper patterns of the box QP
// min <g, d>_M + 1/2 <Hd, d>_M with H = M^-1 A; returns the KKT pattern's (d, lambda).
bool enumerate_qp(const DenseQp& q, const Vector& g, const BoxConstraints& box, const Vector& u, Vector& d_out,
                  Vector& lam_out) {
    const int n = static_cast<int>(u.size());
    int total = 1;
    for (int i = 0; i < n; ++i) total *= 3;
    int found = 0;
    for (int code = 0; code < total; ++code) {
        std::vector<int> s(n);
        for (int i = 0, c = code; i < n; ++i, c /= 3) s[i] = c % 3 - 1;
        Vector d = Vector::Zero(n);
        std::vector<int> free;
        for (int i = 0; i < n; ++i) {
            if (s[i] == 1) d[i] = box.upper[i] - u[i];
            if (s[i] == -1) d[i] = box.lower[i] - u[i];
            if (s[i] == 0) free.push_back(i);
        }
        const MatrixXd H = q.m.cwiseInverse().asDiagonal() * q.A;
        if (!free.empty()) {
            MatrixXd Hff(free.size(), free.size());
            Vector rhs(free.size());
            const Vector t = g + H * d;
            for (std::size_t a = 0; a < free.size(); ++a) {
                rhs[a] = -t[free[a]];
                for (std::size_t b = 0; b < free.size(); ++b) Hff(a, b) = H(free[a], free[b]);
            }
            const Vector x = Hff.fullPivLu().solve(rhs);
            for (std::size_t a = 0; a < free.size(); ++a) d[free[a]] = x[a];
        }
        const Vector lam = -(g + H * d);
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            const double t = u[i] + d[i];
            if (s[i] == 0) ok = t >= box.lower[i] - 1e-12 && t <= box.upper[i] + 1e-12;
            if (s[i] == 1) ok = lam[i] >= -1e-12;
            if (s[i] == -1) ok = lam[i] <= 1e-12;
        }
        if (!ok) continue;
        ++found;
        d_out = d;
        lam_out = Vector::Zero(n);
        for (int i = 0; i < n; ++i)
            if (s[i] != 0) lam_out[i] = lam[i];
    }
    return found >= 1;
}

// Quadratic reduced model J(u) = <b, u>_M + 1/2 <Hu, u>_M for driving run_sqp.
class QuadraticModel : public ReducedModel {
public:
    QuadraticModel(DenseQp q, Vector b) : q_(std::move(q)), b_(std::move(b)) {}
    int size() const override { return static_cast<int>(b_.size()); }
    const Vector& metric() const override { return q_.m; }
    double objective(const Vector& u) override {
        return metric_dot(q_.m, b_, u) + 0.5 * u.dot(q_.A * u);
    }
    void linearize(const Vector& u) override { grad_ = b_ + (q_.A * u).cwiseQuotient(q_.m); }
    const Vector& gradient() const override { return grad_; }
    Vector hess_apply(const Vector& v) const override { return (q_.A * v).cwiseQuotient(q_.m); }
    double kkt_residual(const Vector& u, const BoxConstraints& box) const override {
        return metric_norm(q_.m, complementarity_residual(box, u, -grad_));
    }

private:
    DenseQp q_;
    Vector b_;
    Vector grad_;
};

}  // namespace

TEST_CASE("box helpers") {
    BoxConstraints box = BoxConstraints::uniform(3, -1.0, 1.0, 1.0);
    CHECK((box.project(Vector::Constant(3, 4.0)).array() == 1.0).all());
    CHECK_THROWS_AS(BoxConstraints::uniform(2, 1.0, 0.0, 1.0), ContractViolation);
    CHECK_THROWS_AS(BoxConstraints::uniform(2, 0.0, 1.0, 0.0), ContractViolation);
    const Vector m = Vector::Ones(3);
    CHECK(constraint_violation(m, box, Vector::Zero(3)) == 0.0);
    Vector u(3);
    u << 2.0, 0.0, -3.0;
    CHECK(constraint_violation(m, box, u) == doctest::Approx(1.0 + 2.0));

    SUBCASE("complementarity trichotomy") {
        Vector lam(3), v(3);
        v << -1.0, 0.3, 1.0;
        lam << -7.0, 0.0, 5.0;
        CHECK(complementarity_residual(box, v, lam).cwiseAbs().maxCoeff() == 0.0);
        lam << 7.0, 0.0, -5.0;
        const Vector r = complementarity_residual(box, v, lam);
        CHECK(r[0] != 0.0);
        CHECK(r[1] == 0.0);
        CHECK(r[2] != 0.0);
    }
    SUBCASE("inactive indicator") {
        Vector lam = Vector::Zero(3), v = Vector::Constant(3, 0.25);
        CHECK(inactive_indicator(box, v, lam).sum() == 3.0);
        lam = 2.0 * (box.upper - v);
        CHECK(inactive_indicator(box, v, lam).sum() == 0.0);
    }
}

TEST_CASE("pdAS three-node toy against pattern enumeration") {
    DenseQp q{MatrixXd::Identity(3, 3), Vector::Ones(3)};
    BoxConstraints box = BoxConstraints::uniform(3, -1.0, 1.0, 1.0);
    Vector g(3);
    g << -3.0, 0.0, 3.0;
    const Vector u = Vector::Zero(3);
    const QpResult r = solve_qp_pdas(g, q.hess(), q.m, box, u, Vector::Zero(3), Vector::Zero(3));
    Vector d_or, l_or;
    REQUIRE(enumerate_qp(q, g, box, u, d_or, l_or));
    CHECK(r.status == "sets_coincide");
    CHECK((r.delta - Eigen::Vector3d(1.0, 0.0, -1.0)).norm() < 1e-14);
    CHECK((r.lambda - Eigen::Vector3d(2.0, 0.0, -2.0)).norm() < 1e-14);
    CHECK((r.delta - d_or).norm() < 1e-14);
    CHECK((r.lambda - l_or).norm() < 1e-14);
}

TEST_CASE("pdAS with inactive box equals the dense solve") {
    std::mt19937_64 rng(21);
    DenseQp q = random_qp(16, rng, false);
    const Vector g = random_vector(16, rng);
    BoxConstraints box = BoxConstraints::uniform(16, -1e6, 1e6, 1.0);
    const Vector u = random_vector(16, rng);
    const QpResult r = solve_qp_pdas(g, q.hess(), q.m, box, u, Vector::Zero(16), Vector::Zero(16));
    const Vector oracle = -(q.A.ldlt().solve(q.m.cwiseProduct(g)));
    CHECK((r.delta - oracle).norm() <= 1e-8 * oracle.norm());
    CHECK(r.lambda.cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.active == 0);
}

TEST_CASE("pdAS fully active") {
    std::mt19937_64 rng(5);
    DenseQp q = random_qp(10, rng, true);
    BoxConstraints box = BoxConstraints::uniform(10, -1.0, 1.0, 1.0);
    const Vector u = 0.5 * random_vector(10, rng).cwiseMax(-1.0).cwiseMin(1.0);
    const Vector g = Vector::Constant(10, -1e4);
    const QpResult r = solve_qp_pdas(g, q.hess(), q.m, box, u, Vector::Zero(10), Vector::Zero(10));
    CHECK(r.active == 10);
    CHECK((u + r.delta - box.upper).cwiseAbs().maxCoeff() <= 1e-15);
    const Vector t = -(g + q.hess()(r.delta));
    CHECK((r.lambda - t).norm() <= 1e-12 * t.norm());
    CHECK(r.lambda.minCoeff() >= 0.0);
}

TEST_CASE("pdAS random problems match enumeration and exit complementary") {
    std::mt19937_64 rng(99);
    for (int t = 0; t < 40; ++t) {
        const int n = 3 + t % 4;
        DenseQp q = random_qp(n, rng, t % 2 == 0);
        // c on the scale of the Hessian diagonal, the analogue of c = alpha.
        BoxConstraints box = BoxConstraints::uniform(n, -0.5, 0.7, 1.0 + t % 3);
        const Vector u = (0.3 * random_vector(n, rng)).cwiseMax(-0.5).cwiseMin(0.7);
        const Vector g = random_vector(n, rng, 2.0);
        const QpResult r = solve_qp_pdas(g, q.hess(), q.m, box, u, Vector::Zero(n), Vector::Zero(n));
        REQUIRE(r.ok());
        Vector d_or, l_or;
        REQUIRE(enumerate_qp(q, g, box, u, d_or, l_or));
        CHECK((r.delta - d_or).norm() <= 1e-8 * (1.0 + d_or.norm()));
        CHECK((r.lambda - l_or).norm() <= 1e-8 * (1.0 + l_or.norm()));
        const Vector v = u + r.delta;
        const double eps = 4 * std::numeric_limits<double>::epsilon();
        CHECK((v - box.upper).maxCoeff() <= eps);
        CHECK((box.lower - v).maxCoeff() <= eps);
        CHECK(complementarity_residual(box, v, r.lambda).cwiseAbs().maxCoeff() <= eps * (1.0 + box.c.maxCoeff()));
    }
}

TEST_CASE("pdAS iteration limit keeps the last iterate") {
    std::mt19937_64 rng(3);
    DenseQp q = random_qp(12, rng, true);
    BoxConstraints box = BoxConstraints::uniform(12, -0.1, 0.1, 1.0);
    const Vector g = random_vector(12, rng, 50.0);
    PdasOptions o;
    o.max_iter = 1;
    const QpResult r = solve_qp_pdas(g, q.hess(), q.m, box, Vector::Zero(12), Vector::Zero(12), Vector::Zero(12), o);
    if (!r.ok()) {
        CHECK(r.status == "max_iter");
        CHECK(r.iterations == 1);
        CHECK(r.delta.size() == 12);
    }
}

TEST_CASE("inner stopping rule") {
    std::mt19937_64 rng(17);
    DenseQp q = random_qp(8, rng, false);
    BoxConstraints box = BoxConstraints::uniform(8, -1.0, 1.0, 1.0);
    const Vector u = Vector::Zero(8);
    const Vector g = random_vector(8, rng, 3.0);
    const QpResult r = solve_qp_pdas(g, q.hess(), q.m, box, u, Vector::Zero(8), Vector::Zero(8));
    const double psi0 = constraint_violation(q.m, box, u);
    const double psi1 = constraint_violation(q.m, box, u + r.delta);
    CHECK(psi1 == 0.0);
    for (double xi : {0.1, 0.5, 0.9, 0.99})
        CHECK(sqp_inner_stop(q.m, r.delta, g, q.hess()(r.delta), psi0, psi1, 1.0, xi));

    const Vector zero = Vector::Zero(8);
    CHECK(sqp_inner_stop(q.m, zero, g, zero, 0.0, 0.0, 1.0, 0.9));

    const Vector bad = Vector::Constant(8, 5.0);
    CHECK_FALSE(sqp_inner_stop(q.m, bad, g, q.hess()(bad), psi0, constraint_violation(q.m, box, u + bad), 1.0, 0.9));
}

TEST_CASE("Armijo backtracking") {
    SUBCASE("exact quadratic minimizer at one") {
        auto phi = [](double mu) { return 2.0 - 3.0 * mu + 1.5 * mu * mu; };
        const LineSearchResult ls = armijo_search(phi, 2.0, -3.0, 1.0, 2.0 / 3.0, 1e-3, 1e-5);
        CHECK(ls.ok);
        CHECK(ls.mu == 1.0);
        CHECK(ls.trials == 1);
    }
    SUBCASE("first admissible power by enumeration") {
        const double slope = -1.0, kappa = 0.3, r = 2.0 / 3.0;
        auto phi = [&](double mu) { return slope * mu + 4.0 * mu * mu; };
        int l = 0;
        double mu = 1.0;
        while (!(phi(mu) <= kappa * mu * slope)) {
            mu = std::pow(r, ++l);
        }
        const LineSearchResult ls = armijo_search(phi, 0.0, slope, 1.0, r, kappa, 1e-5);
        CHECK(ls.ok);
        CHECK(ls.trials == l + 1);
        CHECK(ls.mu == doctest::Approx(mu).epsilon(1e-15));
        CHECK(ls.phi - 0.0 <= kappa * ls.mu * slope);
    }
    SUBCASE("floor terminates") {
        auto phi = [](double mu) { return mu; };
        const LineSearchResult ls = armijo_search(phi, 0.0, -1.0, 1.0, 2.0 / 3.0, 1e-3, 1e-5);
        CHECK_FALSE(ls.ok);
        CHECK(ls.mu < 1e-5);
    }
    SUBCASE("non-finite trial values are rejected") {
        auto phi = [](double mu) { return mu > 0.5 ? std::numeric_limits<double>::infinity() : -mu; };
        const LineSearchResult ls = armijo_search(phi, 0.0, -1.0, 1.0, 0.5, 1e-3, 1e-5);
        CHECK(ls.ok);
        CHECK(ls.mu == 0.5);
    }
}

TEST_CASE("SQP on a box-constrained quadratic") {
    std::mt19937_64 rng(41);
    for (int t = 0; t < 5; ++t) {
        const int n = 5;
        DenseQp q = random_qp(n, rng, t % 2 == 1);
        const Vector b = random_vector(n, rng, 10.0);
        BoxConstraints box = BoxConstraints::uniform(n, -0.4, 0.6, 1.0);
        QuadraticModel model(q, b);
        SqpParams sp;
        const SqpResult res = run_sqp(model, box, Vector::Zero(n), Vector::Zero(n), sp);
        CHECK(res.converged());
        CHECK(res.residual <= sp.tol);
        CHECK(res.iterations <= 3);

        Vector d_or, l_or;
        REQUIRE(enumerate_qp(q, b, box, Vector::Zero(n), d_or, l_or));
        CHECK((res.u - d_or).norm() <= 1e-8);
        for (std::size_t k = 1; k < res.history.size(); ++k) {
            CHECK(res.history[k].beta >= res.history[k - 1].beta);
            CHECK(res.history[k].merit < res.history[k - 1].merit);
            CHECK(res.history[k].decrease < 0.0);
        }
        CHECK((res.u.array() <= box.upper.array()).all());
        CHECK((res.u.array() >= box.lower.array()).all());
    }
}

TEST_CASE("SQP parameter contracts") {
    SqpParams p;
    p.r = 1.0;
    CHECK_THROWS_AS(p.check(), ContractViolation);
    p = {};
    p.zeta = 1.0;
    CHECK_THROWS_AS(p.check(), ContractViolation);
    p = {};
    p.xi = 0.0;
    CHECK_THROWS_AS(p.check(), ContractViolation);
}
