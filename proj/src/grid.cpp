#include "licon/grid.hpp"

#include "licon/errors.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <random>
#include <string>

namespace licon {

Grid2D::Grid2D(int nx, int ny, double h, double x_lo, double y_lo)
    : nx_(nx), ny_(ny), h_(h), x_lo_(x_lo), y_lo_(y_lo) {
    require(nx >= 2 && ny >= 2, "Grid2D: need at least two nodes per axis");
    require(h > 0.0 && std::isfinite(h), "Grid2D: mesh width must be positive");
}

Grid2D Grid2D::square(double lo, double hi, double h) {
    require(hi > lo, "Grid2D::square: empty interval");
    const double cells = (hi - lo) / h;
    const double rounded = std::round(cells);
    require(std::abs(cells - rounded) <= 1e-12 * std::max(1.0, rounded),
            "Grid2D::square: extent is not an integer multiple of h");
    const int n = static_cast<int>(rounded) + 1;
    return Grid2D(n, n, h, lo, lo);
}

double Grid2D::weight(int k) const noexcept {
    const int i = k % nx_;
    const int j = k / nx_;
    const double wx = (i == 0 || i == nx_ - 1) ? 0.5 : 1.0;
    const double wy = (j == 0 || j == ny_ - 1) ? 0.5 : 1.0;
    return wx * wy;
}

Vector Grid2D::weights() const {
    Vector w(size());
    for (int k = 0; k < size(); ++k) w[k] = weight(k);
    return w;
}

Vector Grid2D::mass() const { return (h_ * h_) * weights(); }

bool Grid2D::operator==(const Grid2D& o) const noexcept {
    return nx_ == o.nx_ && ny_ == o.ny_ && std::abs(h_ - o.h_) <= 1e-14 * h_ &&
           std::abs(x_lo_ - o.x_lo_) <= 1e-12 && std::abs(y_lo_ - o.y_lo_) <= 1e-12;
}

ScalarField::ScalarField(Grid2D g, Vector v) : grid(g), values(std::move(v)) { check(); }

ScalarField::ScalarField(Grid2D g, double constant)
    : grid(g), values(Vector::Constant(g.size(), constant)) {}

void ScalarField::check() const {
    require(values.size() == grid.size(), "ScalarField: value count does not match grid");
    require(values.allFinite(), "ScalarField: non-finite value");
}

Vector SparseOperator::apply(const Vector& z) const {
    require(z.size() == weights.size(), "SparseOperator::apply: dimension mismatch");
    return (stiffness * z).cwiseQuotient(weights);
}

Eigen::MatrixXd SparseOperator::dense() const {
    Eigen::MatrixXd d = Eigen::MatrixXd(stiffness);
    for (int r = 0; r < d.rows(); ++r) d.row(r) /= weights[r];
    return d;
}

namespace {

void check_size(const Grid2D& grid, const Vector& z, const char* who) {
    if (z.size() != grid.size())
        throw ContractViolation(std::string(who) + ": field size " + std::to_string(z.size()) +
                                " does not match grid size " + std::to_string(grid.size()));
}

inline int mirror(int i, int n) {
    if (i < 0) return -i;
    if (i >= n) return 2 * (n - 1) - i;
    return i;
}

}  // namespace

Vector laplacian_apply(const Grid2D& grid, const Vector& z) {
    check_size(grid, z, "laplacian_apply");
    const int nx = grid.nx();
    const int ny = grid.ny();
    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    Vector out(grid.size());
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double c = z[grid.index(i, j)];
            const double w = z[grid.index(mirror(i - 1, nx), j)];
            const double e = z[grid.index(mirror(i + 1, nx), j)];
            const double s = z[grid.index(i, mirror(j - 1, ny))];
            const double n = z[grid.index(i, mirror(j + 1, ny))];
            out[grid.index(i, j)] = (w + e + s + n - 4.0 * c) * inv_h2;
        }
    }
    return out;
}

ScalarField laplacian_apply(const Grid2D& grid, const ScalarField& z) {
    require(z.grid == grid, "laplacian_apply: field bound to a different grid");
    return ScalarField(grid, laplacian_apply(grid, z.values));
}

SparseOperator operator_matrix(const Grid2D& grid, const Vector& diag) {
    check_size(grid, diag, "operator_matrix");
    const int nx = grid.nx();
    const int ny = grid.ny();
    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(grid.size()) * 5);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int k = grid.index(i, j);
            const double wx = (i == 0 || i == nx - 1) ? 0.5 : 1.0;
            const double wy = (j == 0 || j == ny - 1) ? 0.5 : 1.0;
            // W * (-Delta_h): the mirrored boundary factor 2 cancels the
            // half weight, so an edge couples with the orthogonal weight only.
            double center = wx * wy * diag[k];
            if (i + 1 < nx) {
                const double c = wy * inv_h2;
                trips.emplace_back(k, grid.index(i + 1, j), -c);
                trips.emplace_back(grid.index(i + 1, j), k, -c);
                center += c;
                trips.emplace_back(grid.index(i + 1, j), grid.index(i + 1, j), c);
            }
            if (j + 1 < ny) {
                const double c = wx * inv_h2;
                trips.emplace_back(k, grid.index(i, j + 1), -c);
                trips.emplace_back(grid.index(i, j + 1), k, -c);
                center += c;
                trips.emplace_back(grid.index(i, j + 1), grid.index(i, j + 1), c);
            }
            trips.emplace_back(k, k, center);
        }
    }
    SparseOperator op;
    op.stiffness.resize(grid.size(), grid.size());
    op.stiffness.setFromTriplets(trips.begin(), trips.end());
    op.weights = grid.weights();
    return op;
}

SparseOperator operator_matrix(const Grid2D& grid, const ScalarField& diag) {
    require(diag.grid == grid, "operator_matrix: field bound to a different grid");
    return operator_matrix(grid, diag.values);
}

double inner(const Grid2D& grid, const Vector& z, const Vector& w) {
    check_size(grid, z, "inner");
    check_size(grid, w, "inner");
    double s = 0.0;
    for (int k = 0; k < grid.size(); ++k) s += grid.weight(k) * z[k] * w[k];
    return grid.h() * grid.h() * s;
}

double l2_norm(const Grid2D& grid, const Vector& z) { return std::sqrt(inner(grid, z, z)); }

double h1_seminorm(const Grid2D& grid, const Vector& z) {
    const double q = -inner(grid, laplacian_apply(grid, z), z);
    return std::sqrt(std::max(q, 0.0));
}

DiscreteNorms norms(const Grid2D& grid, const Vector& z) {
    check_size(grid, z, "norms");
    DiscreteNorms n;
    n.l2 = l2_norm(grid, z);
    n.h1_semi = h1_seminorm(grid, z);
    n.linf = z.size() ? z.cwiseAbs().maxCoeff() : 0.0;
    return n;
}

DiscreteNorms norms(const Grid2D& grid, const ScalarField& z) {
    require(z.grid == grid, "norms: field bound to a different grid");
    return norms(grid, z.values);
}

struct LinearSolver::Impl {
    SparseMatrix matrix;
    double matrix_norm = 0.0;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu;
};

namespace {

double inf_norm(const SparseMatrix& S) {
    Vector rows = Vector::Zero(S.rows());
    for (int c = 0; c < S.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(S, c); it; ++it) rows[it.row()] += std::abs(it.value());
    return rows.size() ? rows.maxCoeff() : 0.0;
}

}  // namespace

LinearSolver::LinearSolver(const SparseMatrix& S) : impl_(std::make_unique<Impl>()) {
    require(S.rows() == S.cols(), "LinearSolver: matrix must be square");
    impl_->matrix = S;
    impl_->matrix_norm = inf_norm(S);
    impl_->ldlt.compute(S);
    bool ldlt_ok = impl_->ldlt.info() == Eigen::Success;
    if (ldlt_ok) {
        const Vector d = impl_->ldlt.vectorD();
        const double dmax = d.cwiseAbs().maxCoeff();
        const double dmin = d.cwiseAbs().minCoeff();
        ldlt_ok = d.allFinite() && dmin > 1e-12 * dmax;
    }
    if (ldlt_ok) return;

    // Pivot-free LDL^T hit a tiny pivot; retry with partial pivoting and probe
    // for a numerical kernel.
    impl_->lu = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
    impl_->lu->analyzePattern(S);
    impl_->lu->factorize(S);
    if (impl_->lu->info() != Eigen::Success)
        throw SolverError("LinearSolver: matrix is numerically singular (LU failed)");
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Vector probe(S.rows());
    for (int k = 0; k < probe.size(); ++k) probe[k] = unif(rng);
    const Vector back = impl_->lu->solve(Vector(S * probe));
    if (!back.allFinite() || (back - probe).norm() > 1e-6 * probe.norm())
        throw SolverError("LinearSolver: matrix is numerically singular");
}

LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

Vector LinearSolver::solve(const Vector& b) const {
    require(b.size() == impl_->matrix.rows(), "LinearSolver::solve: dimension mismatch");
    Vector x = impl_->lu ? Vector(impl_->lu->solve(b)) : Vector(impl_->ldlt.solve(b));
    if (!x.allFinite()) throw SolverError("LinearSolver: non-finite solution");
    const double res = (impl_->matrix * x - b).lpNorm<Eigen::Infinity>();
    const double scale = impl_->matrix_norm * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
    if (res > 1e-10 * scale)
        throw SolverError("LinearSolver: residual check failed (" + std::to_string(res / scale) + ")");
    return x;
}

EllipticSolver::EllipticSolver(const Grid2D& grid, const Vector& a)
    : grid_(grid), weights_(grid.weights()), solver_(operator_matrix(grid, a).stiffness) {}

Vector EllipticSolver::solve(const Vector& v) const {
    check_size(grid_, v, "EllipticSolver::solve");
    return solver_.solve(v.cwiseProduct(weights_));
}

HMinusOneNorm::HMinusOneNorm(const Grid2D& grid) : solver_(grid, Vector::Ones(grid.size())) {}

double HMinusOneNorm::operator()(const Vector& r) const {
    const Grid2D& g = solver_.grid();
    check_size(g, r, "hminus1_norm");
    if (r.lpNorm<Eigen::Infinity>() == 0.0) return 0.0;
    const Vector w = solver_.solve(r);
    return std::sqrt(std::max(inner(g, r, w), 0.0));
}

double hminus1_norm(const Grid2D& grid, const Vector& r) { return HMinusOneNorm(grid)(r); }

int coarse_stride(const Grid2D& fine, double coarse_step) {
    require(coarse_step > 0.0, "restrict: coarse step must be positive");
    const double ratio = coarse_step / fine.h();
    const double stride = std::round(ratio);
    require(stride >= 1.0 && std::abs(stride * fine.h() - coarse_step) <= 1e-9,
            "restrict: coarse step is not an integer multiple of the fine mesh width");
    return static_cast<int>(stride);
}

std::vector<Sample> restrict_to_coarse(const ScalarField& z, double coarse_step) {
    z.check();
    const Grid2D& g = z.grid;
    const int stride = coarse_stride(g, coarse_step);
    std::vector<Sample> out;
    for (int j = 0; j < g.ny(); j += stride)
        for (int i = 0; i < g.nx(); i += stride) {
            const int k = g.index(i, j);
            out.push_back(Sample{g.x(i), g.y(j), k, z.values[k]});
        }
    return out;
}

}  // namespace licon
