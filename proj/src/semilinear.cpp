#include "licon/semilinear.hpp"

#include "licon/errors.hpp"

#include <cmath>
#include <string>

namespace licon {

namespace {

Vector pde_residual(const Grid2D& grid, const Vector& fval, const Vector& u, const Vector& y) {
    return -laplacian_apply(grid, y) + fval - u;
}

}  // namespace

double state_residual(const Grid2D& grid, const Nonlinearity& f, const Vector& u, const Vector& y) {
    return hminus1_norm(grid, pde_residual(grid, f.value(grid, y), u, y));
}

StateSolution solve_state(const Grid2D& grid, const Nonlinearity& f, const Vector& u, const Vector& y0, double tol,
                          int max_iter) {
    require(u.size() == grid.size() && y0.size() == grid.size(), "solve_state: field size does not match grid");
    require(tol > 0.0, "solve_state: tolerance must be positive");
    require(max_iter >= 0, "solve_state: negative iteration limit");
    require(u.allFinite() && y0.allFinite(), "solve_state: non-finite input");

    const HMinusOneNorm hnorm(grid);
    const Vector w = grid.weights();
    StateSolution sol;
    sol.y = y0;
    PdeSolveReport& rep = sol.report;

    Vector fv, fy;
    f.evaluate(grid, sol.y, &fv, &fy, nullptr);
    Vector r = pde_residual(grid, fv, u, sol.y);
    rep.residual = hnorm(r);
    rep.residual_history.push_back(rep.residual);

    const double floor = 1e-9 * (1.0 + hnorm(u));
    int k = 0;
    while (rep.residual > tol && k < max_iter) {
        Vector step;
        try {
            LinearSolver solver(operator_matrix(grid, fy).stiffness);
            step = solver.solve(r.cwiseProduct(w));
        } catch (const SolverError& e) {
            throw SolverError("solve_state: Newton step " + std::to_string(k + 1) +
                              ": linearization is singular (" + e.what() + ")");
        }
        sol.y -= step;
        ++k;
        if (!sol.y.allFinite())
            throw DivergenceError("solve_state: non-finite iterate at Newton step " + std::to_string(k));
        f.evaluate(grid, sol.y, &fv, &fy, nullptr);
        if (!fv.allFinite() || !fy.allFinite())
            throw DivergenceError("solve_state: nonlinearity overflow at Newton step " + std::to_string(k));
        r = pde_residual(grid, fv, u, sol.y);
        const double prev = rep.residual;
        rep.residual = hnorm(r);
        rep.residual_history.push_back(rep.residual);
        // Round-off floor: further steps cannot reduce the residual.
        if (rep.residual >= prev && rep.residual < floor) break;
    }
    rep.iterations = k;
    rep.converged = rep.residual <= tol;
    rep.sup_norm = sol.y.size() ? sol.y.cwiseAbs().maxCoeff() : 0.0;
    return sol;
}

ScalarField solve_state(const Nonlinearity& f, const ScalarField& u, const ScalarField& y0, double tol, int max_iter,
                        PdeSolveReport* report) {
    require(u.grid == y0.grid, "solve_state: control and initial guess on different grids");
    StateSolution s = solve_state(u.grid, f, u.values, y0.values, tol, max_iter);
    if (report) *report = s.report;
    return ScalarField(u.grid, std::move(s.y));
}

Vector solve_linearized(const Grid2D& grid, const Vector& a, const Vector& v) {
    require(a.size() == grid.size() && v.size() == grid.size(), "solve_linearized: field size does not match grid");
    return EllipticSolver(grid, a).solve(v);
}

std::pair<double, double> smallness_indicator(const Grid2D& grid, const Nonlinearity& f, const Vector& y) {
    const Vector neg = f.dy(grid, y).cwiseMin(0.0);
    return {l2_norm(grid, neg), neg.size() ? neg.cwiseAbs().maxCoeff() : 0.0};
}

OperatorErrorSample operator_error_sample(const Grid2D& grid, const Nonlinearity& f_exact,
                                          const Nonlinearity& f_surrogate, const std::vector<Vector>& controls,
                                          const std::vector<Vector>& probes, double tol, int max_iter) {
    OperatorErrorSample out;
    for (std::size_t c = 0; c < controls.size(); ++c) {
        try {
            const Vector zero = Vector::Zero(grid.size());
            const StateSolution a = solve_state(grid, f_exact, controls[c], zero, tol, max_iter);
            const StateSolution b = solve_state(grid, f_surrogate, controls[c], zero, tol, max_iter);
            out.state = std::max(out.state, l2_norm(grid, a.y - b.y));
            if (probes.empty()) continue;
            const EllipticSolver sa(grid, f_exact.dy(grid, a.y));
            const EllipticSolver sb(grid, f_surrogate.dy(grid, b.y));
            for (const Vector& v : probes) {
                const Vector d = sa.solve(v) - sb.solve(v);
                const DiscreteNorms n = norms(grid, d);
                out.adjoint = std::max(out.adjoint, n.l2 + n.h1_semi + n.linf);
            }
        } catch (const SolverError& e) {
            throw SolverError("operator_error_sample: control " + std::to_string(c) + ": " + e.what());
        }
    }
    return out;
}

Vector cubic_example_control(const Grid2D& grid, double d) {
    const double pi = std::acos(-1.0);
    return grid.sample([&](double x1, double x2) {
        const double cc = std::cos(pi * x1) * std::cos(pi * x2);
        const double c = std::cos(pi * x1 * x2);
        return -2.0 * d * pi * pi * cc - d * cc - 5.0 * d * d * d * c * c * cc * cc * cc;
    });
}

Vector cubic_example_state(const Grid2D& grid, double d) {
    const double pi = std::acos(-1.0);
    return grid.sample([&](double x1, double x2) { return -d * std::cos(pi * x1) * std::cos(pi * x2); });
}

}  // namespace licon
