#pragma once

#include <Eigen/Dense>

#include <memory>

namespace licon::qmri {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Unitary 2D DFT on ny x nx images stored row-major (index j * nx + i).
/// Owns FFTW plans and aligned buffers; not safe for concurrent use.
class UnitaryDft2 {
public:
    UnitaryDft2(int nx, int ny);
    ~UnitaryDft2();
    UnitaryDft2(UnitaryDft2&&) noexcept;
    UnitaryDft2& operator=(UnitaryDft2&&) noexcept;

    int nx() const noexcept;
    int ny() const noexcept;
    int size() const noexcept;

    CVector forward(const CVector& z) const;
    /// Inverse, equal to the adjoint.
    CVector inverse(const CVector& z) const;
    /// Column-wise transforms of an (size x frames) matrix.
    CMatrix forward(const CMatrix& Z) const;
    CMatrix inverse(const CMatrix& Z) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace licon::qmri
