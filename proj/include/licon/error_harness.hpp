#pragma once

#include "licon/grid.hpp"
#include "licon/sqp.hpp"

#include <functional>
#include <string>
#include <vector>

namespace licon {

/// Control-to-observation map with its directional derivative.
struct ObservationMap {
    std::function<Vector(const Vector&)> value;
    /// Q'(u) v.
    std::function<Vector(const Vector& u, const Vector& v)> derivative;
};

/// Inner product weights of the control and observation spaces.
struct ErrorMetrics {
    Vector control;
    Vector observation;
};

struct ErrorBudget {
    double eps_n = 0.0;
    double eta_n = 0.0;
    double L0 = 0.0;
    double L1 = 0.0;
    double alpha = 0.0;
    double residual_norm = 0.0;
};

/// Sampled operator and derivative discrepancies. eps_n and eta_n are maxima
/// over the controls (and unit-normalized probes); L0 over all (u, probe)
/// pairs, L1 from difference quotients of Q' between control pairs.
ErrorBudget estimate_budget(const ObservationMap& exact, const ObservationMap& surrogate,
                            const std::vector<Vector>& controls, const std::vector<Vector>& probes,
                            const ErrorMetrics& metrics);

/// eps sqrt(3 / alpha).
double zero_residual_bound(double eps, double alpha);
/// sqrt(3 / (alpha - L1 r)) sqrt(eps^2 + 2 r^2) with r = ||Q(u) - g||; NaN if alpha <= L1 r.
double residual_bound(double eps, double alpha, double L1, double residual);

struct RatePoint {
    double eps = 0.0;
    double eta = 0.0;
    double error = 0.0;
    double bound = 0.0;
    bool pass = true;
};

struct RateReport {
    std::vector<RatePoint> points;
    double slope = 0.0;
    double intercept = 0.0;
    bool bound_holds = true;
};

enum class RateMode { perfect_matching, general };

/// Log-log regression of control error against eps_n. Requires >= 3 pairs
/// spanning >= 1 decade in eps_n. In perfect-matching mode each error is
/// tested against eps sqrt(3/alpha) (1 + margin); in general mode against
/// residual_bound with the given L1 and residual.
RateReport verify_rate(const std::vector<std::pair<double, double>>& pairs, double alpha, RateMode mode,
                       double margin = 0.0, double L1 = 0.0, double residual = 0.0);

void write_rate_csv(const std::string& path, const RateReport& report);

/// Closed-form affine family Q(u) = K u + b in R^n with a heterogeneous box.
/// The target is g = Q(ubar) for a ubar that satisfies the box KKT conditions,
/// so ubar is the exact minimizer with zero residual. Surrogates are
/// Q_eps(u) = Q(u) + eps w cos(<a, u>) with ||w|| = ||a|| = 1, so
/// sup ||Q - Q_eps|| <= eps and the derivative error is at most eps.
struct LinearQuadraticFamily {
    Eigen::MatrixXd K;
    Vector b;
    Vector w;
    Vector a;
    Vector ubar;
    Vector g;
    BoxConstraints box;
    double alpha = 0.0;

    static LinearQuadraticFamily make(int n, double alpha, std::uint64_t seed);
    ObservationMap exact() const;
    ObservationMap surrogate(double eps) const;
    /// Minimizer of the surrogate problem, computed by the SQP engine.
    Vector solve_surrogate(double eps, const SqpParams& params = {}) const;
};

}  // namespace licon
