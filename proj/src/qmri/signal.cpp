#include "licon/qmri/signal.hpp"

#include "licon/errors.hpp"

#include <fstream>
#include <map>

namespace licon::qmri {

ExactBlochModel::ExactBlochModel(SequenceSpec seq) : seq_(std::move(seq)) { seq_.check(); }

void ExactBlochModel::evaluate(const Vector& T1, const Vector& T2, CMatrix& s, CMatrix* dT1, CMatrix* dT2) const {
    require(T1.size() == T2.size(), "ExactBlochModel: T1 and T2 sizes differ");
    const Eigen::Index n = T1.size();
    s.resize(n, seq_.L);
    if (dT1) dT1->resize(n, seq_.L);
    if (dT2) dT2->resize(n, seq_.L);
    const bool deriv = dT1 || dT2;
    Series d1, d2;
    for (Eigen::Index k = 0; k < n; ++k) {
        const Series m = bloch_series_extended(T1[k], T2[k], seq_, deriv ? &d1 : nullptr, deriv ? &d2 : nullptr);
        for (int l = 0; l < seq_.L; ++l) {
            s(k, l) = {m(l, 0), m(l, 1)};
            if (dT1) (*dT1)(k, l) = {d1(l, 0), d1(l, 1)};
            if (dT2) (*dT2)(k, l) = {d2(l, 0), d2(l, 1)};
        }
    }
}

std::vector<int> drnn_hidden_widths(const std::string& arch) {
    static const std::map<std::string, std::vector<int>> table = {
        {"1-L-S", {24}},        {"2-L-S", {7, 10}},  {"3-L-S", {5, 8, 5}},
        {"1-L-M", {75}},        {"2-L-M", {17, 16}}, {"3-L-M", {10, 15, 10}},
        {"1-L-L", {130}},       {"2-L-L", {23, 22}}, {"3-L-L", {15, 18, 15}},
    };
    const auto it = table.find(arch);
    if (it == table.end()) throw ContractViolation("unknown DRNN architecture '" + arch + "'");
    return it->second;
}

std::vector<Activation> drnn_activations(int hidden_layers) {
    require(hidden_layers >= 1, "drnn_activations: need a hidden layer");
    std::vector<Activation> a(hidden_layers, Activation::logsig);
    a.back() = Activation::softmax;
    return a;
}

Drnn::Drnn(std::vector<ScaledNet> nets, Vector3 M0) : nets_(std::move(nets)), M0_(M0) {
    require(!nets_.empty(), "Drnn: no sub-networks");
    for (const ScaledNet& n : nets_)
        require(n.net.input_dim() == 2 && n.net.output_dim() == 2, "Drnn: sub-networks must map R^2 to R^2");
}

void Drnn::evaluate(const Vector& T1, const Vector& T2, CMatrix& s, CMatrix* dT1, CMatrix* dT2) const {
    require(T1.size() == T2.size(), "Drnn: T1 and T2 sizes differ");
    const Eigen::Index n = T1.size();
    Eigen::MatrixXd X(2, n);
    X.row(0) = T1.transpose();
    X.row(1) = T2.transpose();
    const int L = frames();
    s.resize(n, L);
    if (dT1) dT1->resize(n, L);
    if (dT2) dT2->resize(n, L);
    for (int l = 0; l < L; ++l) {
        const ScaledNet& net = nets_[l];
        if (dT1 || dT2) {
            const BatchEval e1 = net.directional(X, 0, 1);
            const BatchEval e2 = net.directional(X, 1, 1);
            for (Eigen::Index k = 0; k < n; ++k) {
                s(k, l) = {M0_[0] + e1.value(0, k), M0_[1] + e1.value(1, k)};
                if (dT1) (*dT1)(k, l) = {e1.d1(0, k), e1.d1(1, k)};
                if (dT2) (*dT2)(k, l) = {e2.d1(0, k), e2.d1(1, k)};
            }
        } else {
            const Eigen::MatrixXd v = net.eval_batch(X);
            for (Eigen::Index k = 0; k < n; ++k) s(k, l) = {M0_[0] + v(0, k), M0_[1] + v(1, k)};
        }
    }
}

void Drnn::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("Drnn::save: cannot open " + path);
    out.precision(17);
    out << "drnn " << nets_.size() << ' ' << M0_[0] << ' ' << M0_[1] << ' ' << M0_[2] << '\n';
    for (const ScaledNet& n : nets_) n.save(out);
}

Drnn Drnn::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("Drnn::load: cannot open " + path);
    std::string tag;
    std::size_t count = 0;
    Vector3 m0;
    if (!(in >> tag >> count >> m0[0] >> m0[1] >> m0[2]) || tag != "drnn" || count == 0)
        throw ParseError("Drnn::load: bad header", 1, 1);
    std::vector<ScaledNet> nets;
    for (std::size_t l = 0; l < count; ++l) nets.push_back(ScaledNet::load(in));
    return Drnn(std::move(nets), m0);
}

Drnn train_drnn(const Dictionary& dict, const Vector3& M0, const std::vector<int>& hidden, std::uint64_t seed,
                const TrainOptions& opts, DrnnReport* report) {
    require(dict.size() > 0, "train_drnn: empty dictionary");
    const int L = static_cast<int>(dict.series.front().rows());
    std::vector<int> sizes{2};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(2);
    const std::vector<Activation> acts = drnn_activations(static_cast<int>(hidden.size()));

    std::vector<int> atoms;
    for (int e = 0; e < dict.size(); ++e)
        if (dict.T1[e] > 0.0 && dict.T2[e] > 0.0) atoms.push_back(e);
    require(!atoms.empty(), "train_drnn: no atom with T1, T2 > 0");
    const auto n = static_cast<Eigen::Index>(atoms.size());
    Dataset raw;
    raw.inputs.resize(2, n);
    raw.targets.resize(2, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        raw.inputs(0, c) = dict.T1[atoms[c]];
        raw.inputs(1, c) = dict.T2[atoms[c]];
    }
    std::vector<ScaledNet> nets;
    DrnnReport rep;
    for (int l = 0; l < L; ++l) {
        for (Eigen::Index c = 0; c < n; ++c) {
            raw.targets(0, c) = dict.series[atoms[c]](l, 0) - M0[0];
            raw.targets(1, c) = dict.series[atoms[c]](l, 1) - M0[1];
        }
        SurrogateFit fit = fit_surrogate(raw, sizes, acts, seed + static_cast<std::uint64_t>(l), opts);
        rep.worst_train_mse = std::max(rep.worst_train_mse, fit.report.train_mse);
        rep.subnets.push_back(std::move(fit.report));
        nets.push_back(std::move(fit.model));
    }
    if (report) *report = std::move(rep);
    return Drnn(std::move(nets), M0);
}

double series_relative_error(const SignalModel& model, const SignalModel& reference, const Vector& T1,
                             const Vector& T2) {
    CMatrix a, b;
    model.evaluate(T1, T2, a, nullptr, nullptr);
    reference.evaluate(T1, T2, b, nullptr, nullptr);
    require(a.cols() == b.cols(), "series_relative_error: frame counts differ");
    const double d = b.norm();
    require(d > 0.0, "series_relative_error: zero reference series");
    return (a - b).norm() / d;
}

}  // namespace licon::qmri
