#include "licon/qmri/fourier.hpp"

#include "licon/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>

namespace licon::qmri {

struct UnitaryDft2::Impl {
    int nx = 0, ny = 0;
    fftw_complex* buf = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    double scale = 1.0;

    Impl(int nx_, int ny_) : nx(nx_), ny(ny_) {
        const std::size_t n = static_cast<std::size_t>(nx) * ny;
        buf = fftw_alloc_complex(n);
        if (!buf) throw std::bad_alloc();
        fwd = fftw_plan_dft_2d(ny, nx, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_2d(ny, nx, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!fwd || !bwd) {
            release();
            throw SolverError("UnitaryDft2: FFTW planning failed");
        }
        scale = 1.0 / std::sqrt(static_cast<double>(n));
    }
    ~Impl() { release(); }
    void release() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (buf) fftw_free(buf);
        fwd = bwd = nullptr;
        buf = nullptr;
    }

    CVector run(fftw_plan p, const CVector& z) const {
        const Eigen::Index n = static_cast<Eigen::Index>(nx) * ny;
        require(z.size() == n, "UnitaryDft2: input size does not match the image");
        static_assert(sizeof(std::complex<double>) == sizeof(fftw_complex));
        std::memcpy(buf, z.data(), sizeof(fftw_complex) * n);
        fftw_execute(p);
        CVector out(n);
        std::memcpy(out.data(), buf, sizeof(fftw_complex) * n);
        return out * scale;
    }
};

UnitaryDft2::UnitaryDft2(int nx, int ny) {
    require(nx >= 1 && ny >= 1, "UnitaryDft2: dimensions must be positive");
    impl_ = std::make_unique<Impl>(nx, ny);
}
UnitaryDft2::~UnitaryDft2() = default;
UnitaryDft2::UnitaryDft2(UnitaryDft2&&) noexcept = default;
UnitaryDft2& UnitaryDft2::operator=(UnitaryDft2&&) noexcept = default;

int UnitaryDft2::nx() const noexcept { return impl_->nx; }
int UnitaryDft2::ny() const noexcept { return impl_->ny; }
int UnitaryDft2::size() const noexcept { return impl_->nx * impl_->ny; }

CVector UnitaryDft2::forward(const CVector& z) const { return impl_->run(impl_->fwd, z); }
CVector UnitaryDft2::inverse(const CVector& z) const { return impl_->run(impl_->bwd, z); }

CMatrix UnitaryDft2::forward(const CMatrix& Z) const {
    CMatrix out(Z.rows(), Z.cols());
    for (Eigen::Index c = 0; c < Z.cols(); ++c) out.col(c) = forward(CVector(Z.col(c)));
    return out;
}

CMatrix UnitaryDft2::inverse(const CMatrix& Z) const {
    CMatrix out(Z.rows(), Z.cols());
    for (Eigen::Index c = 0; c < Z.cols(); ++c) out.col(c) = inverse(CVector(Z.col(c)));
    return out;
}

}  // namespace licon::qmri
