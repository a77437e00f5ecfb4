#include "licon/nonlinearity.hpp"

#include "licon/errors.hpp"

#include <cmath>

namespace licon {

Vector Nonlinearity::value(const Grid2D& grid, const Vector& y) const {
    Vector f;
    evaluate(grid, y, &f, nullptr, nullptr);
    return f;
}

Vector Nonlinearity::dy(const Grid2D& grid, const Vector& y) const {
    Vector fy;
    evaluate(grid, y, nullptr, &fy, nullptr);
    return fy;
}

Vector Nonlinearity::dyy(const Grid2D& grid, const Vector& y) const {
    Vector fyy;
    evaluate(grid, y, nullptr, nullptr, &fyy);
    return fyy;
}

AnalyticNonlinearity::AnalyticNonlinearity(Fn f, Fn fy, Fn fyy)
    : f_(std::move(f)), fy_(std::move(fy)), fyy_(std::move(fyy)) {}

void AnalyticNonlinearity::evaluate(const Grid2D& grid, const Vector& y, Vector* f, Vector* fy,
                                    Vector* fyy) const {
    require(y.size() == grid.size(), "Nonlinearity: state size does not match grid");
    if (f) f->resize(grid.size());
    if (fy) fy->resize(grid.size());
    if (fyy) fyy->resize(grid.size());
    for (int j = 0; j < grid.ny(); ++j)
        for (int i = 0; i < grid.nx(); ++i) {
            const int k = grid.index(i, j);
            const double x1 = grid.x(i), x2 = grid.y(j);
            if (f) (*f)[k] = f_(x1, x2, y[k]);
            if (fy) (*fy)[k] = fy_(x1, x2, y[k]);
            if (fyy) (*fyy)[k] = fyy_(x1, x2, y[k]);
        }
}

NonlinearityPtr cubic_example() {
    const double pi = std::acos(-1.0);
    auto c2 = [pi](double x1, double x2) {
        const double c = std::cos(pi * x1 * x2);
        return 5.0 * c * c;
    };
    return std::make_shared<AnalyticNonlinearity>(
        [c2](double x1, double x2, double z) { return z + c2(x1, x2) * z * z * z; },
        [c2](double x1, double x2, double z) { return 1.0 + 3.0 * c2(x1, x2) * z * z; },
        [c2](double x1, double x2, double z) { return 6.0 * c2(x1, x2) * z; });
}

NonlinearityPtr linear_nonlinearity(double c) {
    return std::make_shared<AnalyticNonlinearity>([c](double, double, double z) { return c * z; },
                                                  [c](double, double, double) { return c; },
                                                  [](double, double, double) { return 0.0; });
}

AllenCahn::AllenCahn(double eta) : eta_(eta) { require(eta > 0.0, "AllenCahn: eta must be positive"); }

void AllenCahn::evaluate(const Grid2D& grid, const Vector& y, Vector* f, Vector* fy, Vector* fyy) const {
    require(y.size() == grid.size(), "Nonlinearity: state size does not match grid");
    const double s = 1.0 / eta_;
    if (f) *f = s * (y.array().cube() - y.array()).matrix();
    if (fy) *fy = s * (3.0 * y.array().square() - 1.0).matrix();
    if (fyy) *fyy = (6.0 * s) * y;
}

MlpNonlinearity::MlpNonlinearity(ScaledNet net, Inputs inputs) : net_(std::move(net)), inputs_(inputs) {
    const int want = inputs_ == Inputs::space_and_state ? 3 : 1;
    require(net_.net.input_dim() == want && net_.net.output_dim() == 1,
            "MlpNonlinearity: network has the wrong input/output dimension");
    require(net_.in.dim() == want && net_.out.dim() == 1, "MlpNonlinearity: scaler dimension mismatch");
}

void MlpNonlinearity::evaluate(const Grid2D& grid, const Vector& y, Vector* f, Vector* fy, Vector* fyy) const {
    require(y.size() == grid.size(), "Nonlinearity: state size does not match grid");
    const bool space = inputs_ == Inputs::space_and_state;
    Eigen::MatrixXd X(space ? 3 : 1, grid.size());
    for (int j = 0; j < grid.ny(); ++j)
        for (int i = 0; i < grid.nx(); ++i) {
            const int k = grid.index(i, j);
            if (space) {
                X(0, k) = grid.x(i);
                X(1, k) = grid.y(j);
                X(2, k) = y[k];
            } else {
                X(0, k) = y[k];
            }
        }
    const int dir = space ? 2 : 0;
    if (!fy && !fyy) {
        if (f) *f = net_.eval_batch(X).row(0).transpose();
        return;
    }
    const BatchEval e = net_.directional(X, dir, fyy ? 2 : 1);
    if (f) *f = e.value.row(0).transpose();
    if (fy) *fy = e.d1.row(0).transpose();
    if (fyy) *fyy = e.d2.row(0).transpose();
}

ShiftedNonlinearity::ShiftedNonlinearity(NonlinearityPtr base, Vector shift)
    : base_(std::move(base)), shift_(std::move(shift)) {
    require(base_ != nullptr, "ShiftedNonlinearity: null base");
}

ShiftedNonlinearity::ShiftedNonlinearity(NonlinearityPtr base, double shift)
    : base_(std::move(base)), constant_(shift) {
    require(base_ != nullptr, "ShiftedNonlinearity: null base");
}

void ShiftedNonlinearity::evaluate(const Grid2D& grid, const Vector& y, Vector* f, Vector* fy,
                                   Vector* fyy) const {
    base_->evaluate(grid, y, f, fy, fyy);
    if (!f) return;
    if (shift_.size()) {
        require(shift_.size() == grid.size(), "ShiftedNonlinearity: shift size does not match grid");
        *f += shift_;
    } else {
        f->array() += constant_;
    }
}

}  // namespace licon
