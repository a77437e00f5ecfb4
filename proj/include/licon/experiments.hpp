#pragma once

#include "licon/grid.hpp"
#include "licon/nonlinearity.hpp"
#include "licon/ocp.hpp"
#include "licon/train.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace licon {

/// Amplitudes 0.01, 0.41, ..., 2.01 of the manufactured training controls.
std::vector<double> training_amplitudes();

/// Coarse sampling step for the data-size tags small (0.2), medium (0.1), large (0.08).
double coarse_step_for(const std::string& data_size);

/// Hidden widths of the architecture tags "1-L-S" ... "5-L-L".
std::vector<int> hidden_widths(const std::string& arch);
/// inputs, hidden widths, outputs.
std::vector<int> layer_sizes(const std::string& arch, int inputs, int outputs);
std::vector<Activation> logsig_layers(int count);

struct DataGenOptions {
    double h = 0.02;
    double newton_tol = 1e-16;
    int newton_max_iter = 30;
    /// Newton limits above this H^-1 residual abort the generation.
    double accept = 1e-10;
};

/// Inputs (x1, x2, y), target f = u + Delta_h y at the coarse nodes of every
/// manufactured solve of the cubic example, in amplitude order.
Dataset cubic_training_data(double coarse_step, const DataGenOptions& opts = {});

/// Inputs y, target f = u + Delta_h y on every stride-th node of two solves:
/// the piecewise control +-1000 split at x2 = 1 and the manufactured ramp
/// y = 2.5 (1 - x2).
Dataset allen_cahn_training_data(const Grid2D& grid, double eta, int stride = 2);

/// Reference state -1.5 cos(pi x1) cos(pi x2) and its control for the cubic example.
Vector reference_state(const Grid2D& grid);
Vector reference_control(const Grid2D& grid);

struct StateErrors {
    double h1_discrete = 0.0;  // |y_N - y*_h|_1
    double h1_exact = 0.0;     // |y_N - y*|_1
    double l2_discrete = 0.0;  // ||y_N - y*_h||_0
    double l2_exact = 0.0;     // ||y_N - y*||_0
};

/// Solves the state equation for the reference control with the surrogate
/// and with the exact nonlinearity on the same grid.
StateErrors state_errors(const Grid2D& grid, const Nonlinearity& surrogate, const Nonlinearity& exact);

/// reference_state plus nodal N(0, sigma^2) noise.
Vector noisy_target(const Grid2D& grid, double sigma, std::uint64_t seed);

struct ControlErrors {
    double u_l2 = 0.0;  // ||u_N - ubar||_0
    double y_l2 = 0.0;  // ||y_N - ybar||_0
    double y_h1 = 0.0;  // |y_N - ybar|_1
    OcpResult exact;
    OcpResult surrogate;
};

enum class OcpMethod { ssn, sqp, hybrid };
OcpMethod ocp_method_from_string(const std::string& s);

/// Solves the control problem with both nonlinearities and compares optima.
ControlErrors control_errors(const Grid2D& grid, NonlinearityPtr exact, NonlinearityPtr surrogate, const Vector& g,
                             double alpha, double lower, double upper, const OcpParams& params,
                             OcpMethod method = OcpMethod::ssn);

/// tanh((|x - (1, 1)| - 0.6) / sqrt(2 eta)): +-1 phases with a diffuse interface.
Vector polarized_target(const Grid2D& grid, double eta);

OcpResult solve_ocp(const OcpProblem& prob, const OcpParams& params, OcpMethod method);

}  // namespace licon
