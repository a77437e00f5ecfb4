#pragma once

#include "licon/grid.hpp"
#include "licon/nonlinearity.hpp"

#include <utility>
#include <vector>

namespace licon {

struct PdeSolveReport {
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    /// max |y| of the returned iterate.
    double sup_norm = 0.0;
    std::vector<double> residual_history;
};

struct StateSolution {
    Vector y;
    PdeSolveReport report;
};

/// Newton's method for -Delta_h y + f(x, y) = u with homogeneous Neumann data.
/// The residual is measured in the discrete H^-1 norm.
StateSolution solve_state(const Grid2D& grid, const Nonlinearity& f, const Vector& u, const Vector& y0,
                          double tol = 1e-12, int max_iter = 30);
ScalarField solve_state(const Nonlinearity& f, const ScalarField& u, const ScalarField& y0, double tol,
                        int max_iter, PdeSolveReport* report = nullptr);

/// H^-1 norm of -Delta_h y + f(x, y) - u.
double state_residual(const Grid2D& grid, const Nonlinearity& f, const Vector& u, const Vector& y);

/// (-Delta_h + diag a) p = v.
Vector solve_linearized(const Grid2D& grid, const Vector& a, const Vector& v);

/// (||(f_y)^-||_0, ||(f_y)^-||_inf) at y, with (t)^- = min(t, 0).
std::pair<double, double> smallness_indicator(const Grid2D& grid, const Nonlinearity& f, const Vector& y);

struct OperatorErrorSample {
    double state = 0.0;
    double adjoint = 0.0;
};

/// Largest state and linearized-adjoint discrepancies between two models
/// over a list of controls; adjoint errors use the probe right-hand sides
/// and the norm ||.||_0 + |.|_1 + ||.||_inf.
OperatorErrorSample operator_error_sample(const Grid2D& grid, const Nonlinearity& f_exact,
                                          const Nonlinearity& f_surrogate, const std::vector<Vector>& controls,
                                          const std::vector<Vector>& probes, double tol = 1e-12,
                                          int max_iter = 30);

/// Manufactured control for the cubic example with exact state -d cos(pi x1) cos(pi x2).
Vector cubic_example_control(const Grid2D& grid, double d);
Vector cubic_example_state(const Grid2D& grid, double d);

}  // namespace licon
