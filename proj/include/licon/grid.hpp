#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <vector>

namespace licon {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Uniform node-based grid on [x_lo, x_lo + (nx-1) h] x [y_lo, y_lo + (ny-1) h].
/// Boundary nodes are part of the grid; node k = j * nx + i (row-major, x fastest).
class Grid2D {
public:
    Grid2D(int nx, int ny, double h, double x_lo = 0.0, double y_lo = 0.0);

    /// Grid covering [lo, hi]^2 with mesh width h; (hi - lo) / h must be integral.
    static Grid2D square(double lo, double hi, double h);

    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }
    int size() const noexcept { return nx_ * ny_; }
    double h() const noexcept { return h_; }
    double x_lo() const noexcept { return x_lo_; }
    double y_lo() const noexcept { return y_lo_; }
    double x_hi() const noexcept { return x_lo_ + (nx_ - 1) * h_; }
    double y_hi() const noexcept { return y_lo_ + (ny_ - 1) * h_; }

    int index(int i, int j) const noexcept { return j * nx_ + i; }
    double x(int i) const noexcept { return x_lo_ + i * h_; }
    double y(int j) const noexcept { return y_lo_ + j * h_; }

    /// Trapezoidal quadrature weight of node k (1 inside, 1/2 on edges, 1/4 at corners).
    double weight(int k) const noexcept;
    /// Vector of weight(k) for all nodes.
    Vector weights() const;
    /// Lumped mass h^2 * weight(k).
    Vector mass() const;

    /// Evaluate fn(x, y) at every node.
    template <class Fn>
    Vector sample(Fn&& fn) const {
        Vector v(size());
        for (int j = 0; j < ny_; ++j)
            for (int i = 0; i < nx_; ++i) v[index(i, j)] = fn(x(i), y(j));
        return v;
    }

    bool operator==(const Grid2D& other) const noexcept;
    bool operator!=(const Grid2D& other) const noexcept { return !(*this == other); }

private:
    int nx_;
    int ny_;
    double h_;
    double x_lo_;
    double y_lo_;
};

/// Nodal values bound to a grid.
struct ScalarField {
    Grid2D grid;
    Vector values;

    ScalarField(Grid2D g, Vector v);
    explicit ScalarField(Grid2D g, double constant = 0.0);

    /// Throws ContractViolation if values are non-finite or sized wrong.
    void check() const;
};

struct DiscreteNorms {
    double l2 = 0.0;
    double h1_semi = 0.0;
    double linf = 0.0;
};

/// A lumped-mass operator Op = diag(1/w) * S with S symmetric.
/// `stiffness` is S, `weights` the trapezoid weights w; apply() returns Op z.
struct SparseOperator {
    SparseMatrix stiffness;
    Vector weights;

    Vector apply(const Vector& z) const;
    Eigen::MatrixXd dense() const;
};

/// Action of the discrete Laplacian (consistent with +Delta), homogeneous
/// Neumann closure through mirrored ghost nodes.
Vector laplacian_apply(const Grid2D& grid, const Vector& z);
ScalarField laplacian_apply(const Grid2D& grid, const ScalarField& z);

/// -Delta_h + diag(a), stored in the symmetric weighted form.
SparseOperator operator_matrix(const Grid2D& grid, const Vector& diag);
SparseOperator operator_matrix(const Grid2D& grid, const ScalarField& diag);

/// Discrete inner product <z, w>_h = h^2 sum_k weight_k z_k w_k.
double inner(const Grid2D& grid, const Vector& z, const Vector& w);
double l2_norm(const Grid2D& grid, const Vector& z);
double h1_seminorm(const Grid2D& grid, const Vector& z);
DiscreteNorms norms(const Grid2D& grid, const Vector& z);
DiscreteNorms norms(const Grid2D& grid, const ScalarField& z);

/// Factorized solver for S x = b with S symmetric (LDL^T, LU fallback).
/// Throws SolverError when S is numerically singular.
class LinearSolver {
public:
    explicit LinearSolver(const SparseMatrix& S);
    ~LinearSolver();
    LinearSolver(LinearSolver&&) noexcept;
    LinearSolver& operator=(LinearSolver&&) noexcept;

    /// Solves S x = b; verifies the relative residual.
    Vector solve(const Vector& b) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Solves (-Delta_h + diag(a)) p = v on a grid.
class EllipticSolver {
public:
    EllipticSolver(const Grid2D& grid, const Vector& a);
    Vector solve(const Vector& v) const;
    const Grid2D& grid() const noexcept { return grid_; }

private:
    Grid2D grid_;
    Vector weights_;
    LinearSolver solver_;
};

/// Discrete H^{-1} norm <r, (-Delta_h + I)^{-1} r>_h^{1/2}; holds the factorization.
class HMinusOneNorm {
public:
    explicit HMinusOneNorm(const Grid2D& grid);
    double operator()(const Vector& r) const;
    const Grid2D& grid() const noexcept { return solver_.grid(); }

private:
    EllipticSolver solver_;
};

double hminus1_norm(const Grid2D& grid, const Vector& r);

struct Sample {
    double x = 0.0;
    double y = 0.0;
    int fine_index = 0;
    double value = 0.0;
};

/// Values at the fine nodes that coincide with a coarse grid of step coarse_step.
std::vector<Sample> restrict_to_coarse(const ScalarField& z, double coarse_step);
/// Stride (coarse_step / h) of the coincident-node sampling; validates commensurability.
int coarse_stride(const Grid2D& fine, double coarse_step);

}  // namespace licon
