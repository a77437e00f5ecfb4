#include "doctest.h"

#include "licon/errors.hpp"
#include "licon/ocp.hpp"
#include "licon/semilinear.hpp"
#include "licon/train.hpp"
#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace licon;
using Eigen::MatrixXd;

namespace {

Vector random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Vector v(n);
    for (int k = 0; k < n; ++k) v[k] = nd(rng);
    return v;
}

// Unconstrained optimality system for f = c y, solved densely:
//   A y - u = 0,  A p + y - g = 0,  -p + alpha u = 0,  A = -L + c I.
KktPoint dense_linear_kkt(const Grid2D& grid, double c, const Vector& g, double alpha) {
    const int n = grid.size();
    const MatrixXd A = -oracle::laplacian(grid) + c * MatrixXd::Identity(n, n);
    const MatrixXd I = MatrixXd::Identity(n, n);
    MatrixXd K = MatrixXd::Zero(3 * n, 3 * n);
    K.block(0, 0, n, n) = A;
    K.block(0, n, n, n) = -I;
    K.block(n, 0, n, n) = I;
    K.block(n, 2 * n, n, n) = A;
    K.block(2 * n, n, n, n) = alpha * I;
    K.block(2 * n, 2 * n, n, n) = -I;
    Vector rhs = Vector::Zero(3 * n);
    rhs.segment(n, n) = g;
    const Vector x = K.fullPivLu().solve(rhs);
    KktPoint phi = KktPoint::zero(n);
    phi.y = x.head(n);
    phi.u = x.segment(n, n);
    phi.p = x.tail(n);
    return phi;
}

OcpProblem linear_problem(const Grid2D& grid, double c, double alpha, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return OcpProblem::make(grid, linear_nonlinearity(c), random_vector(grid.size(), rng), alpha, lo, hi);
}

double fd_directional(const OcpProblem& prob, const Vector& u, const Vector& v, double t) {
    auto J = [&](const Vector& w) {
        const StateSolution s = solve_state(prob.grid, *prob.f, w, Vector::Zero(prob.grid.size()), 1e-14, 40);
        return tracking_objective(prob, s.y, w);
    };
    return (J(u + t * v) - J(u - t * v)) / (2.0 * t);
}

NonlinearityPtr small_network_nonlinearity(std::uint64_t seed) {
    ScaledNet net;
    net.net = nguyen_widrow_init({3, 6, 1}, {Activation::tansig}, seed);
    net.in = MinMaxScaler(Eigen::Vector3d(0.0, 0.0, -3.0), Eigen::Vector3d(1.0, 1.0, 3.0));
    net.out = MinMaxScaler(Eigen::VectorXd::Constant(1, -2.0), Eigen::VectorXd::Constant(1, 2.0));
    auto base = std::make_shared<MlpNonlinearity>(net, MlpNonlinearity::Inputs::space_and_state);
    // Adding a linear term keeps the state equation uniquely solvable.
    struct Sum final : Nonlinearity {
        NonlinearityPtr a;
        void evaluate(const Grid2D& g, const Vector& y, Vector* f, Vector* fy, Vector* fyy) const override {
            a->evaluate(g, y, f, fy, fyy);
            if (f) *f += 10.0 * y;
            if (fy) fy->array() += 10.0;
        }
    };
    auto s = std::make_shared<Sum>();
    s->a = base;
    return s;
}

}  // namespace

TEST_CASE("KKT residual vanishes at the dense oracle solution") {
    Grid2D grid(3, 3, 0.5);
    OcpProblem prob = linear_problem(grid, 1.0, 0.1, -1e6, 1e6, 1);
    const KktPoint phi = kkt_residual(dense_linear_kkt(grid, 1.0, prob.g, 0.1), prob);
    CHECK(phi.r_state <= 1e-10);
    CHECK(phi.r_adjoint <= 1e-10);
    CHECK(phi.r_opt <= 1e-10);
    CHECK(phi.r_compl <= 1e-10);
    const KktPoint again = kkt_residual(phi, prob);
    CHECK(again.total() == phi.total());
}

TEST_CASE("complementarity residual on bounds") {
    Grid2D grid(4, 4, 1.0 / 3.0);
    OcpProblem prob = linear_problem(grid, 1.0, 0.5, -2.0, 3.0, 2);
    KktPoint phi = KktPoint::zero(grid.size());
    phi.u = prob.box.lower;
    for (double mag : {0.0, 1e-6, 1.0, 1e6}) {
        phi.lambda = Vector::Constant(grid.size(), -mag);
        CHECK(kkt_fields(phi, prob).r4.cwiseAbs().maxCoeff() == 0.0);
    }
    phi.u = Vector::Constant(grid.size(), 0.5);
    phi.lambda.setZero();
    CHECK(kkt_fields(phi, prob).r4.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("SSN indicator pattern") {
    Grid2D grid(3, 3, 0.5);
    OcpProblem prob = OcpProblem::make(grid, linear_nonlinearity(1.0), Vector::Zero(9), 1.0, -1.0, 1.0);
    KktPoint phi = KktPoint::zero(9);
    phi.u = Vector::Constant(9, 0.2);
    CHECK(ssn_indicator(phi, prob).sum() == 9.0);
    phi.lambda = 2.0 * prob.box.c.cwiseProduct(prob.box.upper - phi.u);
    CHECK(ssn_indicator(phi, prob).sum() == 0.0);
}

TEST_CASE("SSN solves the linear unconstrained problem in one step") {
    Grid2D grid(4, 4, 1.0 / 3.0);
    OcpProblem prob = linear_problem(grid, 2.0, 0.05, -1e6, 1e6, 3);
    const KktPoint oracle = dense_linear_kkt(grid, 2.0, prob.g, 0.05);
    const KktPoint next = kkt_residual(ssn_step(KktPoint::zero(grid.size()), prob), prob);
    CHECK(next.total() <= 1e-9);
    CHECK((next.u - oracle.u).norm() <= 1e-9 * (1.0 + oracle.u.norm()));
    CHECK((next.y - oracle.y).norm() <= 1e-9 * (1.0 + oracle.y.norm()));

    const KktPoint fixed = ssn_step(next, prob);
    CHECK((fixed.y - next.y).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((fixed.u - next.u).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((fixed.p - next.p).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((fixed.lambda - next.lambda).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("SSN places active controls on the bound") {
    Grid2D grid(9, 9, 0.25);
    // Target reachable only with controls beyond the box.
    const Vector u_big = grid.sample([](double x, double y) { return 80.0 * std::cos(M_PI * x) * std::cos(M_PI * y); });
    const Vector g = solve_state(grid, *cubic_example(), u_big, Vector::Zero(grid.size())).y;
    OcpProblem prob = OcpProblem::make(grid, cubic_example(), g, 1e-3, -20.0, 20.0);
    OcpParams params;
    const OcpResult r = solve_ssn(prob, KktPoint::zero(grid.size()), params);
    CHECK(r.converged());
    CHECK(r.point.total() <= 1e-10);
    const Vector G = ssn_indicator(r.point, prob);
    CHECK(G.sum() < grid.size());
    for (int k = 0; k < grid.size(); ++k) {
        CHECK(r.point.u[k] <= 20.0);
        CHECK(r.point.u[k] >= -20.0);
        if (G[k] == 0.0) CHECK(std::abs(r.point.u[k]) == 20.0);
    }
}

TEST_CASE("reduced gradient agrees with finite differences") {
    std::mt19937_64 rng(8);
    Grid2D grid(8, 8, 1.0 / 7.0);
    const Vector g = random_vector(grid.size(), rng);
    for (const NonlinearityPtr& f : {cubic_example(), small_network_nonlinearity(4)}) {
        OcpProblem prob = OcpProblem::make(grid, f, g, 1e-2, -10.0, 10.0);
        const Vector u = random_vector(grid.size(), rng, 2.0);
        const ReducedGradient rg = reduced_gradient(u, prob);
        const Vector m = grid.mass();
        for (int t = 0; t < 3; ++t) {
            const Vector v = random_vector(grid.size(), rng);
            const double analytic = metric_dot(m, rg.gradient, v);
            const double fd = fd_directional(prob, u, v, 1e-5);
            CHECK(std::abs(analytic - fd) <= 1e-4 * std::max(std::abs(fd), 1e-8));
        }
    }
}

TEST_CASE("reduced gradient vanishes for a reachable zero target") {
    Grid2D grid(6, 6, 0.2);
    OcpProblem prob = OcpProblem::make(grid, cubic_example(), Vector::Zero(grid.size()), 1e-2, -1.0, 1.0);
    const ReducedGradient rg = reduced_gradient(Vector::Zero(grid.size()), prob);
    CHECK(rg.gradient.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(rg.objective == 0.0);
}

TEST_CASE("Gauss-Newton Hessian is self-adjoint and positive in the grid product") {
    std::mt19937_64 rng(12);
    Grid2D grid(6, 6, 0.2);
    OcpProblem prob = OcpProblem::make(grid, cubic_example(), random_vector(36, rng), 1e-3, -5.0, 5.0);
    OcpParams params;
    PdeReducedModel model(prob, params);
    const Vector u = random_vector(36, rng);
    model.objective(u);
    model.linearize(u);
    const Vector m = model.metric();
    for (int t = 0; t < 5; ++t) {
        const Vector a = random_vector(36, rng), b = random_vector(36, rng);
        const double ab = metric_dot(m, model.hess_apply(a), b);
        const double ba = metric_dot(m, a, model.hess_apply(b));
        CHECK(std::abs(ab - ba) <= 1e-12 * std::abs(ab) + 1e-14);
        CHECK(metric_dot(m, model.hess_apply(a), a) >= prob.alpha * metric_dot(m, a, a) * (1 - 1e-12));
    }
}

TEST_CASE("SQP converges fast on a linear unconstrained problem") {
    Grid2D grid(8, 8, 1.0 / 7.0);
    OcpProblem prob = linear_problem(grid, 1.0, 1e-2, -1e6, 1e6, 6);
    const KktPoint oracle = dense_linear_kkt(grid, 1.0, prob.g, 1e-2);
    OcpParams params;
    const OcpResult r = solve_sqp(prob, Vector::Zero(grid.size()), params);
    CHECK(r.converged());
    CHECK(r.iterations <= 3);
    CHECK(r.point.total() <= params.sqp.tol);
    CHECK((r.point.u - oracle.u).lpNorm<Eigen::Infinity>() <= 1e-8 * (1.0 + oracle.u.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("SQP and SSN agree on a constrained monotone problem") {
    Grid2D grid(9, 9, 0.25);
    const Vector g = grid.sample([](double x, double y) { return 3.0 * std::cos(M_PI * x) * std::cos(M_PI * y); });
    OcpProblem prob = OcpProblem::make(grid, cubic_example(), g, 1e-3, -8.0, 8.0);
    OcpParams params;
    const OcpResult a = solve_sqp(prob, Vector::Zero(grid.size()), params);
    const OcpResult b = solve_ssn(prob, KktPoint::zero(grid.size()), params);
    const OcpResult c = solve_hybrid(prob, params);
    REQUIRE(a.converged());
    REQUIRE(b.converged());
    REQUIRE(c.converged());
    CHECK(ssn_indicator(a.point, prob).sum() < grid.size());
    CHECK((a.point.u - b.point.u).lpNorm<Eigen::Infinity>() <= 1e-6);
    CHECK((a.point.u - c.point.u).lpNorm<Eigen::Infinity>() <= 1e-6);
    CHECK((a.point.u.array() <= 8.0).all());
    CHECK((a.point.u.array() >= -8.0).all());

    double prev_beta = 0.0;
    for (std::size_t k = 0; k < a.history.size(); ++k) {
        CHECK(a.history[k].beta >= prev_beta);
        prev_beta = a.history[k].beta;
        if (k > 0 && a.history[k].step > 0.0 && a.history[k].note.find("noise_accept") == std::string::npos)
            CHECK(a.history[k].decrease < 0.0);
    }
}

TEST_CASE("hybrid switch threshold selects the method") {
    Grid2D grid(7, 7, 1.0 / 6.0);
    const Vector g = grid.sample([](double x, double y) { return std::sin(4 * x) + y; });
    OcpProblem prob = OcpProblem::make(grid, cubic_example(), g, 1e-2, -3.0, 3.0);
    OcpParams params;
    params.switch_threshold = 0.0;
    const OcpResult ssn = solve_hybrid(prob, params);
    for (const IterationRecord& r : ssn.history) CHECK(r.method == "ssn");
    params.switch_threshold = std::numeric_limits<double>::infinity();
    const OcpResult sqp = solve_hybrid(prob, params);
    for (const IterationRecord& r : sqp.history) CHECK(r.method == "sqp");
    CHECK(ssn.converged());
    CHECK(sqp.converged());
    CHECK((ssn.point.u - sqp.point.u).lpNorm<Eigen::Infinity>() <= 1e-6);

    params.switch_threshold = 5.0;
    const OcpResult hy = solve_hybrid(prob, params);
    CHECK(hy.converged());
    for (std::size_t k = 1; k < hy.history.size(); ++k)
        CHECK(hy.history[k].iteration == hy.history[k - 1].iteration + 1);
}

TEST_CASE("problem contracts") {
    Grid2D grid(3, 3, 0.5);
    CHECK_THROWS_AS(OcpProblem::make(grid, cubic_example(), Vector::Zero(9), 0.0, -1.0, 1.0), ContractViolation);
    CHECK_THROWS_AS(OcpProblem::make(grid, cubic_example(), Vector::Zero(4), 1.0, -1.0, 1.0), ContractViolation);
    CHECK_THROWS_AS(OcpProblem::make(grid, nullptr, Vector::Zero(9), 1.0, -1.0, 1.0), ContractViolation);
}
