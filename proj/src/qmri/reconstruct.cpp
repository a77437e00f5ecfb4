#include "licon/qmri/reconstruct.hpp"

#include "licon/errors.hpp"

#include <cmath>
#include <limits>

namespace licon::qmri {

namespace {

constexpr double kT1Max = 5000.0;
constexpr double kT2Max = 1800.0;
constexpr double kRhoMax = 6000.0;

struct Split3 {
    Vector T1, T2, rho;
};

Split3 split3(const Vector& u, int n) {
    require(u.size() == 3 * n, "qmri: stacked vector has the wrong size");
    return {u.segment(0, n), u.segment(n, n), u.segment(2 * n, n)};
}

double regularization(const Grid2D& grid, const Split3& p, const RegWeights& w) {
    const Vector* comp[3] = {&p.T1, &p.T2, &p.rho};
    double r = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double l2 = l2_norm(grid, *comp[i]);
        const double h1 = h1_seminorm(grid, *comp[i]);
        r += 0.5 * w.alpha0[i] * l2 * l2 + 0.5 * w.alpha1[i] * h1 * h1;
    }
    return r;
}

// alpha0_i v_i + alpha1_i (-Delta_h) v_i per component.
Vector regularization_apply(const Grid2D& grid, const Vector& v, const RegWeights& w) {
    const int n = grid.size();
    Vector out(3 * n);
    for (int i = 0; i < 3; ++i) {
        const Vector vi = v.segment(i * n, n);
        out.segment(i * n, n) = w.alpha0[i] * vi - w.alpha1[i] * laplacian_apply(grid, vi);
    }
    return out;
}

void check_data(const Grid2D& grid, const SignalModel& model, const KSpaceData& data) {
    data.check();
    require(data.nx == grid.nx() && data.ny == grid.ny(), "qmri: data and image sizes differ");
    require(data.frames.cols() == model.frames(), "qmri: data and model frame counts differ");
}

}  // namespace

void RegWeights::check() const {
    require((alpha0.array() >= 0.0).all() && (alpha1.array() >= 0.0).all() && alpha0.allFinite() && alpha1.allFinite(),
            "RegWeights: weights must be finite and nonnegative");
}

BoxConstraints qmri_box(int pixels, const RegWeights& w, double c_scale, double margin) {
    require(pixels > 0, "qmri_box: no pixels");
    require(c_scale > 0.0 && margin >= 0.0 && margin < 0.5, "qmri_box: invalid scaling or margin");
    w.check();
    require((w.alpha1.array() > 0.0).all(), "qmri_box: c = c_scale * alpha1 needs alpha1 > 0");
    const double hi[3] = {kT1Max, kT2Max, kRhoMax};
    BoxConstraints box;
    box.lower.resize(3 * pixels);
    box.upper.resize(3 * pixels);
    box.c.resize(3 * pixels);
    for (int i = 0; i < 3; ++i) {
        box.lower.segment(i * pixels, pixels).setConstant(margin * hi[i]);
        box.upper.segment(i * pixels, pixels).setConstant(hi[i] * (1.0 - margin));
        box.c.segment(i * pixels, pixels).setConstant(c_scale * w.alpha1[i]);
    }
    return box;
}

SqpParams qmri_sqp_defaults() {
    SqpParams p;
    p.mu0 = 1.0;
    p.step_floor = 1e-5;
    p.r = 0.618;
    p.kappa = 1e-3;
    p.xi = 0.5;
    p.tol = 1e-3;
    p.max_iter = 40;
    return p;
}

struct QmriModel::State {
    Grid2D grid;
    const SignalModel& model;
    const KSpaceData& data;
    RegWeights w;
    UnitaryDft2 dft;
    int n;
    Vector weights;   // trapezoid weights per pixel
    Vector metric;    // lumped mass, repeated per component
    Vector frac;      // sampled fraction per frame
    bool full;

    Vector u;
    Split3 p;
    CMatrix s, d1, d2;
    Vector grad;

    State(const Grid2D& g, const SignalModel& m, const KSpaceData& d, const RegWeights& rw)
        : grid(g), model(m), data(d), w(rw), dft(g.nx(), g.ny()), n(g.size()) {
        weights = grid.weights();
        const Vector mass = grid.mass();
        metric.resize(3 * n);
        for (int i = 0; i < 3; ++i) metric.segment(i * n, n) = mass;
        frac.resize(d.frames.cols());
        for (Eigen::Index l = 0; l < frac.size(); ++l) {
            const Mask& mk = d.mask(static_cast<int>(l));
            frac[l] = static_cast<double>(std::count(mk.begin(), mk.end(), 1)) / n;
        }
        full = d.fully_sampled();
    }

    // (P F)^* P F applied frame-wise.
    CMatrix normal_apply(const CMatrix& z) const {
        if (full) return z;
        CMatrix k = dft.forward(z);
        apply_masks(k, data.masks);
        return dft.inverse(k);
    }

    // W^-1 Re Q'^* t, stacked.
    Vector back_project(const CMatrix& t) const {
        Vector g(3 * n);
        for (int k = 0; k < n; ++k) {
            const double rho = p.rho[k];
            double a = 0.0, b = 0.0, c = 0.0;
            for (Eigen::Index l = 0; l < t.cols(); ++l) {
                const std::complex<double> tk = t(k, l);
                a += rho * (std::conj(d1(k, l)) * tk).real();
                b += rho * (std::conj(d2(k, l)) * tk).real();
                c += (std::conj(s(k, l)) * tk).real();
            }
            g[k] = a / weights[k];
            g[n + k] = b / weights[k];
            g[2 * n + k] = c / weights[k];
        }
        return g;
    }
};

QmriModel::QmriModel(const Grid2D& grid, const SignalModel& model, const KSpaceData& data, const RegWeights& w)
    : st_(std::make_unique<State>(grid, model, data, w)) {
    check_data(grid, model, data);
    w.check();
}

QmriModel::~QmriModel() = default;

int QmriModel::size() const { return 3 * st_->n; }
const Vector& QmriModel::metric() const { return st_->metric; }

double QmriModel::objective(const Vector& u) {
    // Inexact QP steps may leave the box; the signal models need T >= 0.
    if (!u.allFinite() || u.head(2 * st_->n).minCoeff() < 0.0) return std::numeric_limits<double>::infinity();
    const QmriImage img = QmriImage::from_stacked(st_->grid, u);
    const double J = qmri_objective(img, st_->model, st_->data, st_->w);
    return std::isfinite(J) ? J : std::numeric_limits<double>::infinity();
}

void QmriModel::linearize(const Vector& u) {
    State& s = *st_;
    s.u = u;
    s.p = split3(u, s.n);
    s.model.evaluate(s.p.T1, s.p.T2, s.s, &s.d1, &s.d2);
    CMatrix k = s.dft.forward(CMatrix(s.p.rho.asDiagonal() * s.s));
    apply_masks(k, s.data.masks);
    const CMatrix back = s.dft.inverse(CMatrix(k - s.data.frames));
    s.grad = s.back_project(back) + regularization_apply(s.grid, u, s.w);
}

const Vector& QmriModel::gradient() const { return st_->grad; }

Vector QmriModel::hess_apply(const Vector& v) const {
    const State& s = *st_;
    require(v.size() == 3 * s.n, "QmriModel::hess_apply: wrong size");
    CMatrix dz(s.n, s.s.cols());
    for (Eigen::Index l = 0; l < dz.cols(); ++l)
        for (int k = 0; k < s.n; ++k)
            dz(k, l) = s.p.rho[k] * (s.d1(k, l) * v[k] + s.d2(k, l) * v[s.n + k]) + s.s(k, l) * v[2 * s.n + k];
    return s.back_project(s.normal_apply(dz)) + regularization_apply(s.grid, v, s.w);
}

Vector QmriModel::hess_diagonal() const {
    const State& s = *st_;
    const double lap = 4.0 / (s.grid.h() * s.grid.h());
    Vector d(3 * s.n);
    for (int k = 0; k < s.n; ++k) {
        double a = 0.0, b = 0.0, c = 0.0;
        for (Eigen::Index l = 0; l < s.s.cols(); ++l) {
            a += s.frac[l] * std::norm(s.p.rho[k] * s.d1(k, l));
            b += s.frac[l] * std::norm(s.p.rho[k] * s.d2(k, l));
            c += s.frac[l] * std::norm(s.s(k, l));
        }
        d[k] = a / s.weights[k];
        d[s.n + k] = b / s.weights[k];
        d[2 * s.n + k] = c / s.weights[k];
    }
    for (int i = 0; i < 3; ++i) d.segment(i * s.n, s.n).array() += s.w.alpha0[i] + s.w.alpha1[i] * lap;
    return d;
}

double QmriModel::kkt_residual(const Vector& u, const BoxConstraints& box) const {
    return metric_norm(st_->metric, complementarity_residual(box, u, -st_->grad));
}

double qmri_objective(const QmriImage& u, const SignalModel& model, const KSpaceData& data, const RegWeights& w) {
    u.check();
    check_data(u.grid, model, data);
    CMatrix s;
    model.evaluate(u.T1, u.T2, s, nullptr, nullptr);
    const UnitaryDft2 dft(data.nx, data.ny);
    CMatrix k = dft.forward(CMatrix(u.rho.asDiagonal() * s));
    apply_masks(k, data.masks);
    const double h = u.grid.h();
    return 0.5 * h * h * (k - data.frames).squaredNorm() + regularization(u.grid, {u.T1, u.T2, u.rho}, w);
}

Vector qmri_gradient(const QmriImage& u, const SignalModel& model, const KSpaceData& data, const RegWeights& w) {
    u.check();
    QmriModel m(u.grid, model, data, w);
    m.linearize(u.stacked());
    return m.gradient();
}

QmriResult solve_qmri_sqp(const KSpaceData& data, const SignalModel& model, const QmriImage& init,
                          const RegWeights& w, const QmriSolveParams& params) {
    init.check();
    QmriModel m(init.grid, model, data, w);
    const BoxConstraints box = qmri_box(init.pixels(), w, params.c_scale, params.box_margin);
    const Vector u0 = box.project(init.stacked());
    SqpResult r = run_sqp(m, box, u0, Vector::Zero(u0.size()), params.sqp);
    QmriImage img = QmriImage::from_stacked(init.grid, r.u);
    return {std::move(img), std::move(r)};
}

QmriImage dictionary_match_init(const KSpaceData& data, const Dictionary& dict, double margin) {
    data.check();
    require(dict.size() > 0, "dictionary_match_init: empty dictionary");
    require(data.nx == data.ny, "dictionary_match_init: image must be square");
    const Eigen::Index L = data.frames.cols();
    require(dict.series.front().rows() == L, "dictionary_match_init: dictionary and data frame counts differ");

    std::vector<int> atoms;
    for (int a = 0; a < dict.size(); ++a)
        if (dict.series[a].leftCols(2).squaredNorm() > 0.0) atoms.push_back(a);
    require(!atoms.empty(), "dictionary_match_init: every atom has a zero transverse series");
    CMatrix A(L, static_cast<Eigen::Index>(atoms.size()));
    Vector norms(atoms.size());
    for (std::size_t c = 0; c < atoms.size(); ++c) {
        const Series& m = dict.series[atoms[c]];
        for (Eigen::Index l = 0; l < L; ++l) A(l, c) = {m(l, 0), m(l, 1)};
        norms[c] = A.col(c).norm();
    }

    const UnitaryDft2 dft(data.nx, data.ny);
    const CMatrix X = dft.inverse(data.frames);
    // C(k, a) = <s_a, x_k>.
    const CMatrix C = X.conjugate() * A;
    QmriImage img(image_grid(data.nx));
    const BoxConstraints box = qmri_box(img.pixels(), RegWeights{}, 1.0, margin);
    const int n = img.pixels();
    for (int k = 0; k < n; ++k) {
        Eigen::Index best = 0;
        double best_corr = -1.0;
        for (Eigen::Index c = 0; c < C.cols(); ++c) {
            const double corr = std::abs(C(k, c)) / norms[c];
            if (corr > best_corr) {
                best_corr = corr;
                best = c;
            }
        }
        const int a = atoms[best];
        img.T1[k] = dict.T1[a];
        img.T2[k] = dict.T2[a];
        img.rho[k] = std::conj(C(k, best)).real() / (norms[best] * norms[best]);
    }
    const Vector u = box.project(img.stacked());
    return QmriImage::from_stacked(img.grid, u);
}

}  // namespace licon::qmri
