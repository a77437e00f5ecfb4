#pragma once

#include "licon/errors.hpp"
#include "licon/mlp.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace licon {

enum class Split : unsigned char { train, val, test };

/// Column-wise samples; inputs (r x n), targets (s x n).
struct Dataset {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd targets;
    std::vector<Split> tags;

    int size() const noexcept { return static_cast<int>(inputs.cols()); }
    /// Columns carrying the given tag.
    Dataset subset(Split which) const;
    int count(Split which) const;
};

/// n_train = round(0.8 n), n_val = round(0.1 n), n_test the remainder.
struct SplitSizes {
    int train = 0;
    int val = 0;
    int test = 0;
};
SplitSizes split_sizes(int n);

/// Random 8:1:1 tagging driven by `seed`.
Dataset split(const Dataset& data, std::uint64_t seed);

Mlp nguyen_widrow_init(const std::vector<int>& layer_sizes, const std::vector<Activation>& hidden,
                       std::uint64_t seed);

struct TrainOptions {
    int max_iter = 1000;
    double grad_tol = 1e-7;
    double mu0 = 1e-3;
    double mu_dec = 0.1;
    double mu_inc = 10.0;
    double mu_max = 1e10;
    /// Evidence-based re-estimation of alpha, beta; off gives plain LM.
    bool bayesian = true;
};

struct TrainReport {
    double grad_norm = 0.0;
    int iterations = 0;
    double initial_mse = 0.0;
    double train_mse = 0.0;
    double val_mse = 0.0;
    double test_mse = 0.0;
    double gamma = 0.0;
    double alpha = 0.0;
    double beta = 1.0;
    /// grad_tol, max_iter or mu_max.
    std::string reason;
    /// Objective before/after every accepted step, at fixed hyperparameters.
    std::vector<std::pair<double, double>> accepted;
};

class TrainingError : public SolverError {
public:
    TrainingError(const std::string& what, TrainReport partial)
        : SolverError(what), report_(std::move(partial)) {}
    const TrainReport& report() const noexcept { return report_; }

private:
    TrainReport report_;
};

struct TrainResult {
    Mlp net;
    TrainReport report;
};

/// Levenberg-Marquardt on beta*E_D + alpha*E_W over the train split (all
/// samples if untagged). Data are expected in scaled units.
TrainResult train_lm_bayes(const Mlp& net, const Dataset& data, const TrainOptions& opts = {});

double mean_squared_error(const Mlp& net, const Dataset& data);

/// Fits scalers, splits, initializes and trains; the usual front door.
struct SurrogateFit {
    ScaledNet model;
    TrainReport report;
};
SurrogateFit fit_surrogate(const Dataset& raw, const std::vector<int>& layer_sizes,
                           const std::vector<Activation>& hidden, std::uint64_t seed,
                           const TrainOptions& opts = {});

}  // namespace licon
