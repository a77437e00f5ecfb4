#include "licon/train.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace licon {

Dataset Dataset::subset(Split which) const {
    if (tags.empty()) return *this;
    std::vector<Eigen::Index> cols;
    for (std::size_t k = 0; k < tags.size(); ++k)
        if (tags[k] == which) cols.push_back(static_cast<Eigen::Index>(k));
    Dataset d;
    d.inputs.resize(inputs.rows(), static_cast<Eigen::Index>(cols.size()));
    d.targets.resize(targets.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) {
        d.inputs.col(i) = inputs.col(cols[i]);
        d.targets.col(i) = targets.col(cols[i]);
    }
    d.tags.assign(cols.size(), which);
    return d;
}

int Dataset::count(Split which) const {
    if (tags.empty()) return which == Split::train ? size() : 0;
    return static_cast<int>(std::count(tags.begin(), tags.end(), which));
}

SplitSizes split_sizes(int n) {
    require(n >= 10, "split: need at least 10 samples");
    SplitSizes s;
    s.train = static_cast<int>(std::lround(0.8 * n));
    s.val = static_cast<int>(std::lround(0.1 * n));
    s.test = n - s.train - s.val;
    return s;
}

Dataset split(const Dataset& data, std::uint64_t seed) {
    require(data.inputs.cols() == data.targets.cols(), "split: inputs and targets differ in length");
    const SplitSizes s = split_sizes(data.size());
    std::vector<int> perm(data.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    Dataset out = data;
    out.tags.assign(data.size(), Split::train);
    for (int i = s.train; i < s.train + s.val; ++i) out.tags[perm[i]] = Split::val;
    for (int i = s.train + s.val; i < data.size(); ++i) out.tags[perm[i]] = Split::test;
    return out;
}

Mlp nguyen_widrow_init(const std::vector<int>& sizes, const std::vector<Activation>& hidden, std::uint64_t seed) {
    Mlp net(sizes, hidden);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto& layers = net.layers();
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
        auto& L = layers[l];
        const double fan_in = static_cast<double>(L.W.cols());
        const double magw = 0.7 * std::pow(static_cast<double>(L.W.rows()), 1.0 / fan_in);
        for (Eigen::Index r = 0; r < L.W.rows(); ++r) {
            Eigen::VectorXd row(L.W.cols());
            do {
                for (Eigen::Index c = 0; c < row.size(); ++c) row[c] = normal(rng);
            } while (row.norm() < 1e-12);
            L.W.row(r) = magw * row.normalized().transpose();
        }
        for (Eigen::Index r = 0; r < L.b.size(); ++r) L.b[r] = magw * unit(rng);
    }
    auto& out = layers.back();
    for (Eigen::Index k = 0; k < out.W.size(); ++k) out.W.data()[k] = 0.5 * unit(rng);
    for (Eigen::Index k = 0; k < out.b.size(); ++k) out.b[k] = 0.5 * unit(rng);
    return net;
}

double mean_squared_error(const Mlp& net, const Dataset& data) {
    if (data.size() == 0) return 0.0;
    const Eigen::MatrixXd r = net.forward_batch(data.inputs) - data.targets;
    return r.squaredNorm() / static_cast<double>(r.size());
}

namespace {

struct Linearization {
    Eigen::VectorXd e;        // residuals, output minus target
    Eigen::MatrixXd JtJ;      // lower triangle valid
    Eigen::VectorXd Jte;
};

Linearization linearize(const Mlp& net, const Dataset& d) {
    Eigen::MatrixXd out, J;
    net.parameter_jacobian(d.inputs, out, J);
    Linearization lin;
    const Eigen::MatrixXd R = out - d.targets;
    lin.e = Eigen::Map<const Eigen::VectorXd>(R.data(), R.size());
    const Eigen::Index P = J.cols();
    lin.JtJ = Eigen::MatrixXd::Zero(P, P);
    lin.JtJ.selfadjointView<Eigen::Lower>().rankUpdate(J.transpose());
    lin.Jte = J.transpose() * lin.e;
    return lin;
}

double sum_squares(const Mlp& net, const Dataset& d) {
    return (net.forward_batch(d.inputs) - d.targets).squaredNorm();
}

}  // namespace

TrainResult train_lm_bayes(const Mlp& init, const Dataset& data, const TrainOptions& opts) {
    require(data.inputs.rows() == init.input_dim() && data.targets.rows() == init.output_dim(),
            "train_lm_bayes: network and data dimensions differ");
    require(opts.max_iter >= 0 && opts.max_iter <= 1000, "train_lm_bayes: max_iter must lie in [0, 1000]");
    const Dataset train = data.subset(Split::train);
    require(train.size() > 0, "train_lm_bayes: no training samples");

    Mlp net = init;
    Eigen::VectorXd w = net.parameters();
    const Eigen::Index P = w.size();
    const double n_err = static_cast<double>(train.targets.size());

    TrainReport rep;
    rep.initial_mse = mean_squared_error(net, train);
    double alpha = 0.0;
    double beta = 1.0;
    double mu = opts.mu0;
    double gamma = static_cast<double>(P);
    double ed = sum_squares(net, train);
    double ew = w.squaredNorm();

    auto finish = [&](const std::string& reason, double gnorm) {
        rep.reason = reason;
        rep.grad_norm = gnorm;
        rep.alpha = alpha;
        rep.beta = beta;
        rep.gamma = gamma;
    };

    Linearization lin = linearize(net, train);
    int iter = 0;
    while (true) {
        const Eigen::VectorXd grad = 2.0 * (beta * lin.Jte + alpha * w);
        const double gnorm = grad.norm();
        if (!std::isfinite(gnorm)) {
            finish("diverged", gnorm);
            throw TrainingError("train_lm_bayes: non-finite gradient", rep);
        }
        if (gnorm < opts.grad_tol) {
            finish("grad_tol", gnorm);
            break;
        }
        if (iter >= opts.max_iter) {
            finish("max_iter", gnorm);
            break;
        }

        const double f_old = beta * ed + alpha * ew;
        bool accepted = false;
        bool factored_any = false;
        while (mu <= opts.mu_max) {
            Eigen::MatrixXd A = beta * lin.JtJ;
            A.diagonal().array() += alpha + mu;
            Eigen::LLT<Eigen::MatrixXd> llt(A.selfadjointView<Eigen::Lower>());
            if (llt.info() != Eigen::Success) {
                mu *= opts.mu_inc;
                continue;
            }
            factored_any = true;
            const Eigen::VectorXd step = -llt.solve(beta * lin.Jte + alpha * w);
            const Eigen::VectorXd w_new = w + step;
            Mlp trial = net;
            trial.set_parameters(w_new);
            const double ed_new = sum_squares(trial, train);
            const double ew_new = w_new.squaredNorm();
            const double f_new = beta * ed_new + alpha * ew_new;
            if (std::isfinite(f_new) && f_new < f_old) {
                rep.accepted.emplace_back(f_old, f_new);
                net = std::move(trial);
                w = w_new;
                ed = ed_new;
                ew = ew_new;
                mu = std::max(mu * opts.mu_dec, 1e-20);
                accepted = true;
                break;
            }
            mu *= opts.mu_inc;
        }
        if (!accepted) {
            finish("mu_max", gnorm);
            rep.iterations = iter;
            if (!factored_any && iter == 0) throw TrainingError("train_lm_bayes: normal equations singular up to mu_max", rep);
            break;
        }
        ++iter;
        rep.iterations = iter;
        lin = linearize(net, train);

        if (opts.bayesian) {
            Eigen::MatrixXd B = beta * lin.JtJ;
            B.diagonal().array() += alpha;
            double trace_inv = 0.0;
            if (alpha > 0.0) {
                Eigen::LLT<Eigen::MatrixXd> llt(B.selfadjointView<Eigen::Lower>());
                if (llt.info() == Eigen::Success) {
                    // tr(B^-1) = ||L^-1||_F^2.
                    Eigen::MatrixXd Linv = Eigen::MatrixXd::Identity(P, P);
                    llt.matrixL().solveInPlace(Linv);
                    trace_inv = Linv.squaredNorm();
                } else
                    trace_inv = static_cast<double>(P) / alpha;
            }
            gamma = std::clamp(static_cast<double>(P) - alpha * trace_inv, 0.0, static_cast<double>(P));
            alpha = ew > 0.0 ? gamma / (2.0 * ew) : 1.0;
            const double dof_left = std::max(n_err - gamma, 1e-12 * n_err);
            beta = dof_left / (2.0 * std::max(ed, 1e-24 * n_err));
        }
    }
    rep.iterations = iter;

    TrainResult res;
    const double final_mse = mean_squared_error(net, train);
    if (final_mse <= rep.initial_mse) {
        res.net = std::move(net);
        rep.train_mse = final_mse;
    } else {
        res.net = init;
        rep.train_mse = rep.initial_mse;
    }
    rep.val_mse = mean_squared_error(res.net, data.subset(Split::val));
    rep.test_mse = mean_squared_error(res.net, data.subset(Split::test));
    if (data.tags.empty()) rep.val_mse = rep.test_mse = 0.0;
    res.report = std::move(rep);
    return res;
}

namespace {

// Min-max fit that widens constant components to a unit half-width.
MinMaxScaler padded_fit(const Eigen::MatrixXd& X) {
    Eigen::VectorXd lo = X.rowwise().minCoeff();
    Eigen::VectorXd hi = X.rowwise().maxCoeff();
    for (Eigen::Index i = 0; i < lo.size(); ++i)
        if (!(hi[i] > lo[i])) {
            const double pad = std::max(1.0, std::abs(lo[i]));
            lo[i] -= pad;
            hi[i] += pad;
        }
    return MinMaxScaler(lo, hi);
}

}  // namespace

SurrogateFit fit_surrogate(const Dataset& raw, const std::vector<int>& layer_sizes,
                           const std::vector<Activation>& hidden, std::uint64_t seed, const TrainOptions& opts) {
    require(raw.size() > 0, "fit_surrogate: empty data set");
    SurrogateFit fit;
    fit.model.in = padded_fit(raw.inputs);
    fit.model.out = padded_fit(raw.targets);
    Dataset scaled;
    scaled.inputs = fit.model.in.scale_columns(raw.inputs);
    scaled.targets = fit.model.out.scale_columns(raw.targets);
    scaled = split(scaled, seed);
    Mlp init = nguyen_widrow_init(layer_sizes, hidden, seed + 0x9e3779b97f4a7c15ULL);
    TrainResult tr = train_lm_bayes(init, scaled, opts);
    fit.model.net = std::move(tr.net);
    fit.report = std::move(tr.report);
    return fit;
}

}  // namespace licon
