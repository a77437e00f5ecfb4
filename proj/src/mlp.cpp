#include "licon/mlp.hpp"

#include "licon/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace licon {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::logsig: return "logsig";
        case Activation::tansig: return "tansig";
        case Activation::softmax: return "softmax";
        case Activation::identity: return "identity";
    }
    return "unknown";
}

Activation activation_from_string(const std::string& s) {
    if (s == "logsig") return Activation::logsig;
    if (s == "tansig") return Activation::tansig;
    if (s == "softmax") return Activation::softmax;
    if (s == "identity" || s == "purelin") return Activation::identity;
    throw ContractViolation("unknown activation '" + s + "'");
}

int dof_count(const std::vector<int>& sizes) {
    require(sizes.size() >= 2, "dof_count: need at least input and output layer");
    int n = 0;
    for (std::size_t i = 1; i < sizes.size(); ++i) n += sizes[i] * sizes[i - 1] + sizes[i];
    return n;
}

Mlp::Mlp(std::vector<int> layer_sizes, std::vector<Activation> hidden) : sizes_(std::move(layer_sizes)) {
    require(sizes_.size() >= 2, "Mlp: need at least input and output layer");
    require(hidden.size() == sizes_.size() - 2, "Mlp: one activation per hidden layer required");
    for (int s : sizes_) require(s >= 1, "Mlp: layer sizes must be positive");
    for (std::size_t i = 1; i < sizes_.size(); ++i) {
        DenseLayer L;
        L.W = Eigen::MatrixXd::Zero(sizes_[i], sizes_[i - 1]);
        L.b = Eigen::VectorXd::Zero(sizes_[i]);
        L.act = (i + 1 == sizes_.size()) ? Activation::identity : hidden[i - 1];
        layers_.push_back(std::move(L));
    }
}

int Mlp::dof() const noexcept {
    int n = 0;
    for (const auto& L : layers_) n += static_cast<int>(L.W.size() + L.b.size());
    return n;
}

void Mlp::check() const {
    require(!layers_.empty(), "Mlp: empty network");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& L = layers_[i];
        require(L.W.rows() == sizes_[i + 1] && L.W.cols() == sizes_[i] && L.b.size() == sizes_[i + 1],
                "Mlp: layer shape does not match layer sizes");
    }
    require(layers_.back().act == Activation::identity, "Mlp: output layer must be affine");
}

namespace {

constexpr double kExpClamp = 500.0;

inline double logsig(double z) {
    z = std::clamp(z, -kExpClamp, kExpClamp);
    return 1.0 / (1.0 + std::exp(-z));
}

void softmax_column(Eigen::Ref<Eigen::VectorXd> z) {
    const double m = z.maxCoeff();
    z = (z.array() - m).exp();
    z /= z.sum();
}

// Applies the activation in place to Z and propagates the first and second
// directional derivatives D1, D2 (which enter as those of Z).
void activate(Activation act, Eigen::MatrixXd& Z, Eigen::MatrixXd* D1, Eigen::MatrixXd* D2) {
    switch (act) {
        case Activation::identity: return;
        case Activation::logsig: {
            for (Eigen::Index k = 0; k < Z.size(); ++k) {
                const double s = logsig(Z.data()[k]);
                const double s1 = s * (1.0 - s);
                if (D1) {
                    const double d = D1->data()[k];
                    if (D2) D2->data()[k] = s1 * (1.0 - 2.0 * s) * d * d + s1 * D2->data()[k];
                    D1->data()[k] = s1 * d;
                }
                Z.data()[k] = s;
            }
            return;
        }
        case Activation::tansig: {
            for (Eigen::Index k = 0; k < Z.size(); ++k) {
                const double t = std::tanh(Z.data()[k]);
                const double t1 = 1.0 - t * t;
                if (D1) {
                    const double d = D1->data()[k];
                    if (D2) D2->data()[k] = -2.0 * t * t1 * d * d + t1 * D2->data()[k];
                    D1->data()[k] = t1 * d;
                }
                Z.data()[k] = t;
            }
            return;
        }
        case Activation::softmax: {
            for (Eigen::Index c = 0; c < Z.cols(); ++c) {
                softmax_column(Z.col(c));
                if (!D1) continue;
                const auto s = Z.col(c).array();
                const Eigen::ArrayXd v = D1->col(c).array();
                const double sv = (s * v).sum();
                const Eigen::ArrayXd centered = v - sv;
                if (D2) {
                    const Eigen::ArrayXd a = D2->col(c).array();
                    const double var = (s * v * v).sum() - sv * sv;
                    const double sa = (s * a).sum();
                    D2->col(c) = (s * (centered.square() - var) + s * (a - sa)).matrix();
                }
                D1->col(c) = (s * centered).matrix();
            }
            return;
        }
    }
}

}  // namespace

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
    require(x.size() == input_dim(), "Mlp::forward: input dimension mismatch");
    return forward_batch(x);
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& X) const {
    check();
    require(X.rows() == input_dim(), "Mlp::forward_batch: input dimension mismatch");
    Eigen::MatrixXd H = X;
    for (const auto& L : layers_) {
        Eigen::MatrixXd Z = (L.W * H).colwise() + L.b;
        activate(L.act, Z, nullptr, nullptr);
        H = std::move(Z);
    }
    return H;
}

BatchEval Mlp::forward_directional(const Eigen::MatrixXd& X, int direction, int order) const {
    check();
    require(X.rows() == input_dim(), "Mlp::forward_directional: input dimension mismatch");
    require(direction >= 0 && direction < input_dim(), "Mlp::forward_directional: bad direction");
    require(order == 1 || order == 2, "Mlp::forward_directional: order must be 1 or 2");
    Eigen::MatrixXd H = X;
    Eigen::MatrixXd D1 = Eigen::MatrixXd::Zero(X.rows(), X.cols());
    D1.row(direction).setOnes();
    Eigen::MatrixXd D2 = Eigen::MatrixXd::Zero(X.rows(), X.cols());
    bool first = true;
    for (const auto& L : layers_) {
        Eigen::MatrixXd Z = (L.W * H).colwise() + L.b;
        Eigen::MatrixXd Z1 = first ? Eigen::MatrixXd(L.W.col(direction).replicate(1, X.cols())) : Eigen::MatrixXd(L.W * D1);
        Eigen::MatrixXd Z2 = (order == 2 && !first) ? Eigen::MatrixXd(L.W * D2)
                                                    : Eigen::MatrixXd::Zero(Z.rows(), Z.cols());
        activate(L.act, Z, &Z1, order == 2 ? &Z2 : nullptr);
        H = std::move(Z);
        D1 = std::move(Z1);
        D2 = std::move(Z2);
        first = false;
    }
    BatchEval out;
    out.value = std::move(H);
    out.d1 = std::move(D1);
    if (order == 2) out.d2 = std::move(D2);
    return out;
}

Eigen::MatrixXd Mlp::input_jacobian(const Eigen::VectorXd& x) const {
    require(x.size() == input_dim(), "Mlp::input_jacobian: input dimension mismatch");
    Eigen::MatrixXd J(output_dim(), input_dim());
    for (int i = 0; i < input_dim(); ++i) J.col(i) = forward_directional(x, i, 1).d1.col(0);
    return J;
}

Eigen::VectorXd Mlp::input_second_partial(const Eigen::VectorXd& x, int i) const {
    require(x.size() == input_dim(), "Mlp::input_second_partial: input dimension mismatch");
    return forward_directional(x, i, 2).d2.col(0);
}

Eigen::VectorXd Mlp::parameters() const {
    Eigen::VectorXd theta(dof());
    Eigen::Index p = 0;
    for (const auto& L : layers_) {
        for (Eigen::Index r = 0; r < L.W.rows(); ++r)
            for (Eigen::Index c = 0; c < L.W.cols(); ++c) theta[p++] = L.W(r, c);
        for (Eigen::Index r = 0; r < L.b.size(); ++r) theta[p++] = L.b[r];
    }
    return theta;
}

void Mlp::set_parameters(const Eigen::VectorXd& theta) {
    require(theta.size() == dof(), "Mlp::set_parameters: parameter count mismatch");
    Eigen::Index p = 0;
    for (auto& L : layers_) {
        for (Eigen::Index r = 0; r < L.W.rows(); ++r)
            for (Eigen::Index c = 0; c < L.W.cols(); ++c) L.W(r, c) = theta[p++];
        for (Eigen::Index r = 0; r < L.b.size(); ++r) L.b[r] = theta[p++];
    }
}

void Mlp::parameter_jacobian(const Eigen::MatrixXd& X, Eigen::MatrixXd& out, Eigen::MatrixXd& J) const {
    check();
    require(X.rows() == input_dim(), "Mlp::parameter_jacobian: input dimension mismatch");
    const Eigen::Index n = X.cols();
    const int s = output_dim();
    const std::size_t nl = layers_.size();

    std::vector<Eigen::MatrixXd> inputs(nl);
    std::vector<Eigen::MatrixXd> outputs(nl);
    Eigen::MatrixXd H = X;
    for (std::size_t l = 0; l < nl; ++l) {
        inputs[l] = H;
        Eigen::MatrixXd Z = (layers_[l].W * H).colwise() + layers_[l].b;
        activate(layers_[l].act, Z, nullptr, nullptr);
        outputs[l] = Z;
        H = std::move(Z);
    }
    out = H;

    std::vector<Eigen::Index> offset(nl);
    Eigen::Index p = 0;
    for (std::size_t l = 0; l < nl; ++l) {
        offset[l] = p;
        p += layers_[l].W.size() + layers_[l].b.size();
    }
    J.resize(n * s, p);

    for (int o = 0; o < s; ++o) {
        Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(s, n);
        delta.row(o).setOnes();
        for (std::size_t l = nl; l-- > 0;) {
            const DenseLayer& L = layers_[l];
            // delta is dN_o / d(pre-activation) of layer l after this block.
            if (L.act == Activation::logsig) {
                delta.array() *= outputs[l].array() * (1.0 - outputs[l].array());
            } else if (L.act == Activation::tansig) {
                delta.array() *= 1.0 - outputs[l].array().square();
            } else if (L.act == Activation::softmax) {
                for (Eigen::Index k = 0; k < n; ++k) {
                    const auto sk = outputs[l].col(k).array();
                    const double sg = (sk * delta.col(k).array()).sum();
                    delta.col(k) = (sk * (delta.col(k).array() - sg)).matrix();
                }
            }
            const Eigen::Index rows = L.W.rows();
            const Eigen::Index cols = L.W.cols();
            for (Eigen::Index k = 0; k < n; ++k) {
                auto row = J.row(k * s + o);
                Eigen::Index q = offset[l];
                for (Eigen::Index a = 0; a < rows; ++a) {
                    const double d = delta(a, k);
                    for (Eigen::Index b = 0; b < cols; ++b) row[q++] = d * inputs[l](b, k);
                }
                for (Eigen::Index a = 0; a < rows; ++a) row[q++] = delta(a, k);
            }
            if (l > 0) delta = L.W.transpose() * delta;
        }
    }
}

namespace {

void write_matrix(std::ostream& os, const Eigen::MatrixXd& M) {
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        for (Eigen::Index c = 0; c < M.cols(); ++c) os << (c ? " " : "") << M(r, c);
        os << '\n';
    }
}

// Line-oriented tokenizer that reports positions for parse errors.
class TokenReader {
public:
    explicit TokenReader(std::istream& is) : is_(is) {}

    std::string word() {
        skip();
        const int col = pos_ + 1;
        std::string tok;
        while (pos_ < static_cast<int>(line_.size()) && !std::isspace(static_cast<unsigned char>(line_[pos_])))
            tok.push_back(line_[pos_++]);
        if (tok.empty()) throw ParseError("unexpected end of input", line_no_, col);
        last_col_ = col;
        return tok;
    }

    double number() {
        const std::string tok = word();
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size() || !std::isfinite(v))
            throw ParseError("malformed number '" + tok + "'", line_no_, last_col_);
        return v;
    }

    int integer() {
        const std::string tok = word();
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) throw ParseError("malformed integer '" + tok + "'", line_no_, last_col_);
        return v;
    }

    void expect(const std::string& w) {
        const std::string tok = word();
        if (tok != w) throw ParseError("expected '" + w + "', found '" + tok + "'", line_no_, last_col_);
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_no_, last_col_); }

private:
    void skip() {
        while (true) {
            while (pos_ < static_cast<int>(line_.size()) && std::isspace(static_cast<unsigned char>(line_[pos_])))
                ++pos_;
            if (pos_ < static_cast<int>(line_.size()) && line_[pos_] != '#') return;
            if (!std::getline(is_, line_)) {
                line_.clear();
                pos_ = 0;
                return;
            }
            ++line_no_;
            pos_ = 0;
        }
    }

    std::istream& is_;
    std::string line_;
    int pos_ = 0;
    int line_no_ = 0;
    int last_col_ = 0;
};

Eigen::MatrixXd read_matrix(TokenReader& tr, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = tr.number();
    return M;
}

Mlp read_mlp(TokenReader& tr) {
    tr.expect("mlp");
    const int nlayers = tr.integer();
    if (nlayers < 2) tr.fail("mlp needs at least two layers");
    std::vector<int> sizes(nlayers);
    for (int& s : sizes) {
        s = tr.integer();
        if (s < 1) tr.fail("layer size must be positive");
    }
    tr.expect("activations");
    std::vector<Activation> acts;
    for (int i = 1; i < nlayers; ++i) {
        const std::string w = tr.word();
        try {
            acts.push_back(activation_from_string(w));
        } catch (const ContractViolation&) {
            tr.fail("unknown activation '" + w + "'");
        }
    }
    if (acts.back() != Activation::identity) tr.fail("output activation must be identity");
    acts.pop_back();
    Mlp net(sizes, acts);
    for (auto& L : net.layers()) {
        tr.expect("W");
        L.W = read_matrix(tr, L.W.rows(), L.W.cols());
        tr.expect("b");
        L.b = read_matrix(tr, L.b.size(), 1);
    }
    return net;
}

}  // namespace

void Mlp::save(std::ostream& os) const {
    check();
    const auto old = os.precision(17);
    os << "mlp " << sizes_.size();
    for (int s : sizes_) os << ' ' << s;
    os << "\nactivations";
    for (const auto& L : layers_) os << ' ' << to_string(L.act);
    os << '\n';
    for (const auto& L : layers_) {
        os << "W\n";
        write_matrix(os, L.W);
        os << "b\n";
        write_matrix(os, L.b.transpose());
    }
    os.precision(old);
}

Mlp Mlp::load(std::istream& is) {
    TokenReader tr(is);
    return read_mlp(tr);
}

MinMaxScaler::MinMaxScaler(Eigen::VectorXd min, Eigen::VectorXd max) : min_(std::move(min)), max_(std::move(max)) {
    require(min_.size() == max_.size(), "MinMaxScaler: min/max dimension mismatch");
    for (Eigen::Index i = 0; i < min_.size(); ++i)
        require(max_[i] > min_[i], "MinMaxScaler: degenerate range in component " + std::to_string(i));
}

MinMaxScaler MinMaxScaler::fit(const Eigen::MatrixXd& X) {
    require(X.cols() > 0, "MinMaxScaler::fit: no samples");
    return MinMaxScaler(X.rowwise().minCoeff(), X.rowwise().maxCoeff());
}

Eigen::VectorXd MinMaxScaler::scale(const Eigen::VectorXd& v) const {
    require(v.size() == dim(), "MinMaxScaler::scale: dimension mismatch");
    return (2.0 * (v - min_).array() / (max_ - min_).array() - 1.0).matrix();
}

Eigen::VectorXd MinMaxScaler::unscale(const Eigen::VectorXd& v) const {
    require(v.size() == dim(), "MinMaxScaler::unscale: dimension mismatch");
    return ((v.array() + 1.0) * 0.5 * (max_ - min_).array() + min_.array()).matrix();
}

Eigen::MatrixXd MinMaxScaler::scale_columns(const Eigen::MatrixXd& X) const {
    require(X.rows() == dim(), "MinMaxScaler::scale_columns: dimension mismatch");
    const Eigen::ArrayXd g = gain().array();
    Eigen::MatrixXd Y(X.rows(), X.cols());
    for (Eigen::Index c = 0; c < X.cols(); ++c) Y.col(c) = ((X.col(c) - min_).array() * g - 1.0).matrix();
    return Y;
}

Eigen::MatrixXd MinMaxScaler::unscale_columns(const Eigen::MatrixXd& X) const {
    require(X.rows() == dim(), "MinMaxScaler::unscale_columns: dimension mismatch");
    const Eigen::ArrayXd half = 0.5 * (max_ - min_).array();
    Eigen::MatrixXd Y(X.rows(), X.cols());
    for (Eigen::Index c = 0; c < X.cols(); ++c) Y.col(c) = ((X.col(c).array() + 1.0) * half + min_.array()).matrix();
    return Y;
}

bool MinMaxScaler::extrapolates(const Eigen::VectorXd& v) const {
    return ((v - min_).array() < 0.0).any() || ((v - max_).array() > 0.0).any();
}

Eigen::VectorXd ScaledNet::operator()(const Eigen::VectorXd& x) const {
    return out.unscale(net.forward(in.scale(x)));
}

Eigen::MatrixXd ScaledNet::eval_batch(const Eigen::MatrixXd& X) const {
    return out.unscale_columns(net.forward_batch(in.scale_columns(X)));
}

BatchEval ScaledNet::directional(const Eigen::MatrixXd& X, int direction, int order) const {
    BatchEval e = net.forward_directional(in.scale_columns(X), direction, order);
    const double gin = in.gain()[direction];
    const Eigen::VectorXd gout = out.gain().cwiseInverse();
    e.value = out.unscale_columns(e.value);
    e.d1 = gout.asDiagonal() * e.d1 * gin;
    if (order == 2) e.d2 = gout.asDiagonal() * e.d2 * (gin * gin);
    return e;
}

Eigen::MatrixXd ScaledNet::input_jacobian(const Eigen::VectorXd& x) const {
    const Eigen::MatrixXd J = net.input_jacobian(in.scale(x));
    return out.gain().cwiseInverse().asDiagonal() * J * in.gain().asDiagonal();
}

void ScaledNet::save(std::ostream& os) const {
    const auto old = os.precision(17);
    os << "scaler_in " << in.dim() << '\n';
    write_matrix(os, in.min().transpose());
    write_matrix(os, in.max().transpose());
    os << "scaler_out " << out.dim() << '\n';
    write_matrix(os, out.min().transpose());
    write_matrix(os, out.max().transpose());
    os.precision(old);
    net.save(os);
}

ScaledNet ScaledNet::load(std::istream& is) {
    TokenReader tr(is);
    ScaledNet s;
    tr.expect("scaler_in");
    const int ni = tr.integer();
    Eigen::VectorXd imin = read_matrix(tr, ni, 1);
    Eigen::VectorXd imax = read_matrix(tr, ni, 1);
    tr.expect("scaler_out");
    const int no = tr.integer();
    Eigen::VectorXd omin = read_matrix(tr, no, 1);
    Eigen::VectorXd omax = read_matrix(tr, no, 1);
    try {
        s.in = MinMaxScaler(imin, imax);
        s.out = MinMaxScaler(omin, omax);
    } catch (const ContractViolation& e) {
        tr.fail(e.what());
    }
    s.net = read_mlp(tr);
    if (s.net.input_dim() != ni || s.net.output_dim() != no) tr.fail("scaler dimension does not match network");
    return s;
}

void ScaledNet::save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    save(os);
}

ScaledNet ScaledNet::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    return load(is);
}

}  // namespace licon
