#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace licon {

enum class Activation { logsig, tansig, softmax, identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct DenseLayer {
    Eigen::MatrixXd W;
    Eigen::VectorXd b;
    Activation act = Activation::logsig;
};

/// Values and derivatives of a batch of network evaluations along one input
/// coordinate. Each matrix is (outputs x samples).
struct BatchEval {
    Eigen::MatrixXd value;
    Eigen::MatrixXd d1;
    Eigen::MatrixXd d2;
};

/// Feedforward network x -> W0 sigma(... sigma(W1 x + b1) ...) + b0.
/// The output layer is affine (identity activation).
class Mlp {
public:
    Mlp() = default;
    /// Zero-initialized network; `hidden` holds one activation per hidden layer.
    Mlp(std::vector<int> layer_sizes, std::vector<Activation> hidden);

    const std::vector<int>& layer_sizes() const noexcept { return sizes_; }
    int input_dim() const noexcept { return sizes_.front(); }
    int output_dim() const noexcept { return sizes_.back(); }
    int dof() const noexcept;

    std::vector<DenseLayer>& layers() noexcept { return layers_; }
    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    /// Columns of X are inputs.
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& X) const;
    /// Forward-mode value, first and (if order == 2) second derivative
    /// with respect to input coordinate `direction`.
    BatchEval forward_directional(const Eigen::MatrixXd& X, int direction, int order = 2) const;

    /// d N / d x, (outputs x inputs).
    Eigen::MatrixXd input_jacobian(const Eigen::VectorXd& x) const;
    /// d^2 N / d x_i^2.
    Eigen::VectorXd input_second_partial(const Eigen::VectorXd& x, int i) const;

    /// Flattened parameters, per layer: W row-major, then b.
    Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::VectorXd& theta);

    /// Outputs at the columns of X and the parameter Jacobian; row k*s + o
    /// holds d N_o(x_k) / d theta.
    void parameter_jacobian(const Eigen::MatrixXd& X, Eigen::MatrixXd& out, Eigen::MatrixXd& J) const;

    void save(std::ostream& os) const;
    static Mlp load(std::istream& is);

private:
    void check() const;

    std::vector<int> sizes_;
    std::vector<DenseLayer> layers_;
};

int dof_count(const std::vector<int>& layer_sizes);

/// Per-component affine map of [min, max] onto [-1, 1].
class MinMaxScaler {
public:
    MinMaxScaler() = default;
    MinMaxScaler(Eigen::VectorXd min, Eigen::VectorXd max);
    /// Ranges from the columns of X.
    static MinMaxScaler fit(const Eigen::MatrixXd& X);

    int dim() const noexcept { return static_cast<int>(min_.size()); }
    const Eigen::VectorXd& min() const noexcept { return min_; }
    const Eigen::VectorXd& max() const noexcept { return max_; }
    /// d scaled / d raw, per component.
    Eigen::VectorXd gain() const { return 2.0 * (max_ - min_).cwiseInverse(); }

    Eigen::VectorXd scale(const Eigen::VectorXd& v) const;
    Eigen::VectorXd unscale(const Eigen::VectorXd& v) const;
    Eigen::MatrixXd scale_columns(const Eigen::MatrixXd& X) const;
    Eigen::MatrixXd unscale_columns(const Eigen::MatrixXd& X) const;
    /// True if v leaves the fitted box in some component.
    bool extrapolates(const Eigen::VectorXd& v) const;

private:
    Eigen::VectorXd min_;
    Eigen::VectorXd max_;
};

/// Network together with its input and output normalization.
struct ScaledNet {
    Mlp net;
    MinMaxScaler in;
    MinMaxScaler out;

    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd eval_batch(const Eigen::MatrixXd& X) const;
    /// Value and derivatives in physical units along raw input `direction`.
    BatchEval directional(const Eigen::MatrixXd& X, int direction, int order = 2) const;
    Eigen::MatrixXd input_jacobian(const Eigen::VectorXd& x) const;

    void save(std::ostream& os) const;
    static ScaledNet load(std::istream& is);
    void save(const std::string& path) const;
    static ScaledNet load(const std::string& path);
};

}  // namespace licon
