#pragma once

#include "licon/grid.hpp"
#include "licon/mlp.hpp"

#include <functional>
#include <memory>

namespace licon {

/// f(x, y) with its first and second y-derivatives, evaluated nodewise.
class Nonlinearity {
public:
    virtual ~Nonlinearity() = default;

    /// Any of the output pointers may be null.
    virtual void evaluate(const Grid2D& grid, const Vector& y, Vector* f, Vector* fy, Vector* fyy) const = 0;

    Vector value(const Grid2D& grid, const Vector& y) const;
    Vector dy(const Grid2D& grid, const Vector& y) const;
    Vector dyy(const Grid2D& grid, const Vector& y) const;
};

using NonlinearityPtr = std::shared_ptr<const Nonlinearity>;

/// f given by closed-form callables of (x1, x2, y).
class AnalyticNonlinearity final : public Nonlinearity {
public:
    using Fn = std::function<double(double, double, double)>;
    AnalyticNonlinearity(Fn f, Fn fy, Fn fyy);
    void evaluate(const Grid2D& grid, const Vector& y, Vector* f, Vector* fy, Vector* fyy) const override;

private:
    Fn f_, fy_, fyy_;
};

/// z + 5 cos^2(pi x1 x2) z^3.
NonlinearityPtr cubic_example();
/// Linear f = c * y.
NonlinearityPtr linear_nonlinearity(double c);

/// (y^3 - y) / eta.
class AllenCahn final : public Nonlinearity {
public:
    explicit AllenCahn(double eta);
    double eta() const noexcept { return eta_; }
    void evaluate(const Grid2D& grid, const Vector& y, Vector* f, Vector* fy, Vector* fyy) const override;

private:
    double eta_;
};

/// Network surrogate; inputs (x1, x2, y) or y alone.
class MlpNonlinearity final : public Nonlinearity {
public:
    enum class Inputs { space_and_state, state_only };
    MlpNonlinearity(ScaledNet net, Inputs inputs);
    const ScaledNet& net() const noexcept { return net_; }
    Inputs inputs() const noexcept { return inputs_; }
    void evaluate(const Grid2D& grid, const Vector& y, Vector* f, Vector* fy, Vector* fyy) const override;

private:
    ScaledNet net_;
    Inputs inputs_;
};

/// base + shift, the shift a nodal field independent of y.
class ShiftedNonlinearity final : public Nonlinearity {
public:
    ShiftedNonlinearity(NonlinearityPtr base, Vector shift);
    ShiftedNonlinearity(NonlinearityPtr base, double shift);
    void evaluate(const Grid2D& grid, const Vector& y, Vector* f, Vector* fy, Vector* fyy) const override;

private:
    NonlinearityPtr base_;
    Vector shift_;
    double constant_ = 0.0;
};

}  // namespace licon
