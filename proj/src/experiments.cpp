#include "licon/experiments.hpp"

#include "licon/errors.hpp"
#include "licon/semilinear.hpp"

#include <cmath>
#include <map>
#include <random>

namespace licon {

std::vector<double> training_amplitudes() {
    std::vector<double> d;
    for (int j = 0; j <= 5; ++j) d.push_back(0.01 + 0.4 * j);
    return d;
}

double coarse_step_for(const std::string& data_size) {
    if (data_size == "small") return 0.2;
    if (data_size == "medium") return 0.1;
    if (data_size == "large") return 0.08;
    throw ContractViolation("unknown data size '" + data_size + "' (small, medium, large)");
}

std::vector<int> hidden_widths(const std::string& arch) {
    static const std::map<std::string, std::vector<int>> table = {
        {"1-L-S", {30}},           {"3-L-S", {6, 10, 5}},   {"5-L-S", {3, 5, 10, 5, 1}},
        {"1-L-M", {60}},           {"3-L-M", {10, 12, 10}}, {"5-L-M", {5, 8, 10, 8, 6}},
        {"1-L-L", {120}},          {"3-L-L", {15, 18, 13}}, {"5-L-L", {10, 10, 15, 10, 10}},
    };
    const auto it = table.find(arch);
    if (it == table.end()) throw ContractViolation("unknown architecture '" + arch + "'");
    return it->second;
}

std::vector<int> layer_sizes(const std::string& arch, int inputs, int outputs) {
    std::vector<int> s{inputs};
    for (int w : hidden_widths(arch)) s.push_back(w);
    s.push_back(outputs);
    return s;
}

std::vector<Activation> logsig_layers(int count) { return std::vector<Activation>(count, Activation::logsig); }

namespace {

StateSolution checked_solve(const Grid2D& grid, const Nonlinearity& f, const Vector& u, const Vector& y0,
                            const DataGenOptions& opts, const std::string& what) {
    StateSolution s = solve_state(grid, f, u, y0, opts.newton_tol, opts.newton_max_iter);
    if (!(s.report.residual <= opts.accept))
        throw SolverError(what + ": Newton residual " + std::to_string(s.report.residual) + " after " +
                          std::to_string(s.report.iterations) + " iterations");
    return s;
}

}  // namespace

Dataset cubic_training_data(double coarse_step, const DataGenOptions& opts) {
    const Grid2D grid = Grid2D::square(0.0, 2.0, opts.h);
    const int stride = coarse_stride(grid, coarse_step);
    const auto f = cubic_example();
    const std::vector<double> amps = training_amplitudes();
    std::vector<int> nodes;
    for (int j = 0; j < grid.ny(); j += stride)
        for (int i = 0; i < grid.nx(); i += stride) nodes.push_back(grid.index(i, j));

    Dataset data;
    const Eigen::Index m = static_cast<Eigen::Index>(nodes.size());
    data.inputs.resize(3, m * amps.size());
    data.targets.resize(1, m * amps.size());
    for (std::size_t j = 0; j < amps.size(); ++j) {
        const Vector u = cubic_example_control(grid, amps[j]);
        const StateSolution s = checked_solve(grid, *f, u, Vector::Zero(grid.size()), opts,
                                              "cubic_training_data: control " + std::to_string(j));
        const Vector fv = u + laplacian_apply(grid, s.y);
        for (Eigen::Index q = 0; q < m; ++q) {
            const int k = nodes[q];
            const Eigen::Index col = static_cast<Eigen::Index>(j) * m + q;
            data.inputs(0, col) = grid.x(k % grid.nx());
            data.inputs(1, col) = grid.y(k / grid.nx());
            data.inputs(2, col) = s.y[k];
            data.targets(0, col) = fv[k];
        }
    }
    return data;
}

Dataset allen_cahn_training_data(const Grid2D& grid, double eta, int stride) {
    require(stride >= 1, "allen_cahn_training_data: stride must be positive");
    const AllenCahn f(eta);
    const double mid = 0.5 * (grid.y_lo() + grid.y_hi());
    const Vector ud = grid.sample([&](double, double x2) { return x2 < mid ? 1000.0 : -1000.0; });
    const Vector yramp = grid.sample([&](double, double x2) { return 2.5 * (1.0 - (x2 - grid.y_lo()) / (mid - grid.y_lo())); });
    const Vector uramp = -laplacian_apply(grid, yramp) + f.value(grid, yramp);

    DataGenOptions opts;
    opts.newton_tol = 1e-13;
    // Start each branch at the pointwise root of f(y) = +-1000.
    const double root = 1.795;
    const StateSolution s1 = checked_solve(grid, f, ud, ud * (root / 1000.0), opts, "allen_cahn_training_data: step control");
    const StateSolution s2 = checked_solve(grid, f, uramp, yramp, opts, "allen_cahn_training_data: ramp control");

    std::vector<int> nodes;
    for (int j = 0; j < grid.ny(); j += stride)
        for (int i = 0; i < grid.nx(); i += stride) nodes.push_back(grid.index(i, j));
    const Eigen::Index m = static_cast<Eigen::Index>(nodes.size());
    Dataset data;
    data.inputs.resize(1, 2 * m);
    data.targets.resize(1, 2 * m);
    const Vector f1 = ud + laplacian_apply(grid, s1.y);
    const Vector f2 = uramp + laplacian_apply(grid, s2.y);
    for (Eigen::Index q = 0; q < m; ++q) {
        data.inputs(0, q) = s1.y[nodes[q]];
        data.targets(0, q) = f1[nodes[q]];
        data.inputs(0, m + q) = s2.y[nodes[q]];
        data.targets(0, m + q) = f2[nodes[q]];
    }
    return data;
}

Vector reference_state(const Grid2D& grid) { return cubic_example_state(grid, 1.5); }
Vector reference_control(const Grid2D& grid) { return cubic_example_control(grid, 1.5); }

StateErrors state_errors(const Grid2D& grid, const Nonlinearity& surrogate, const Nonlinearity& exact) {
    const Vector u = reference_control(grid);
    const Vector ystar = reference_state(grid);
    DataGenOptions opts;
    opts.newton_tol = 1e-12;
    opts.accept = 1e-9;
    const Vector yh = checked_solve(grid, exact, u, ystar, opts, "state_errors: exact model").y;
    const Vector yn = checked_solve(grid, surrogate, u, yh, opts, "state_errors: surrogate model").y;
    StateErrors e;
    e.h1_discrete = h1_seminorm(grid, yn - yh);
    e.h1_exact = h1_seminorm(grid, yn - ystar);
    e.l2_discrete = l2_norm(grid, yn - yh);
    e.l2_exact = l2_norm(grid, yn - ystar);
    return e;
}

Vector noisy_target(const Grid2D& grid, double sigma, std::uint64_t seed) {
    require(sigma >= 0.0, "noisy_target: negative noise level");
    Vector g = reference_state(grid);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (Eigen::Index k = 0; k < g.size(); ++k) g[k] += sigma * nd(rng);
    return g;
}

OcpMethod ocp_method_from_string(const std::string& s) {
    if (s == "ssn") return OcpMethod::ssn;
    if (s == "sqp") return OcpMethod::sqp;
    if (s == "hybrid") return OcpMethod::hybrid;
    throw ContractViolation("unknown method '" + s + "' (ssn, sqp, hybrid)");
}

OcpResult solve_ocp(const OcpProblem& prob, const OcpParams& params, OcpMethod method) {
    switch (method) {
        case OcpMethod::ssn: return solve_ssn(prob, KktPoint::zero(prob.grid.size()), params);
        case OcpMethod::sqp: return solve_sqp(prob, prob.box.project(Vector::Zero(prob.grid.size())), params);
        case OcpMethod::hybrid: break;
    }
    return solve_hybrid(prob, params);
}

ControlErrors control_errors(const Grid2D& grid, NonlinearityPtr exact, NonlinearityPtr surrogate, const Vector& g,
                             double alpha, double lower, double upper, const OcpParams& params, OcpMethod method) {
    const OcpProblem pe = OcpProblem::make(grid, std::move(exact), g, alpha, lower, upper);
    const OcpProblem pn = OcpProblem::make(grid, std::move(surrogate), g, alpha, lower, upper);
    ControlErrors e;
    e.exact = solve_ocp(pe, params, method);
    e.surrogate = solve_ocp(pn, params, method);
    const KktPoint& a = e.surrogate.point;
    const KktPoint& b = e.exact.point;
    e.u_l2 = l2_norm(grid, a.u - b.u);
    e.y_l2 = l2_norm(grid, a.y - b.y);
    e.y_h1 = h1_seminorm(grid, a.y - b.y);
    return e;
}

Vector polarized_target(const Grid2D& grid, double eta) {
    require(eta > 0.0, "polarized_target: eta must be positive");
    const double w = std::sqrt(2.0 * eta);
    const double cx = 0.5 * (grid.x_lo() + grid.x_hi()), cy = 0.5 * (grid.y_lo() + grid.y_hi());
    const double r = 0.3 * (grid.x_hi() - grid.x_lo());
    return grid.sample([&](double x1, double x2) { return std::tanh((std::hypot(x1 - cx, x2 - cy) - r) / w); });
}

}  // namespace licon
