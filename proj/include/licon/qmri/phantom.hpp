#pragma once

#include "licon/grid.hpp"

#include <string>

namespace licon::qmri {

/// Parameter maps (T1, T2 in ms, rho dimensionless) on an n x n pixel grid
/// covering [0, 1]^2, h = 1 / (n - 1).
struct QmriImage {
    Grid2D grid;
    Vector T1, T2, rho;

    explicit QmriImage(Grid2D g);
    int pixels() const noexcept { return grid.size(); }
    /// [T1; T2; rho].
    Vector stacked() const;
    static QmriImage from_stacked(const Grid2D& grid, const Vector& u);
    void check() const;
};

Grid2D image_grid(int n);

/// Piecewise-constant ellipse head: scalp, white matter, grey-matter blobs,
/// ventricles, surrounded by soft tissue so every pixel carries signal.
QmriImage synth_phantom(int n);

/// Table rows "i,j,T1,T2,rho" after a header; every pixel of an n x n grid
/// must appear once. Malformed input throws ParseError.
void save_phantom(const std::string& path, const QmriImage& img);
QmriImage load_phantom(const std::string& path);

/// Relative error ||x - x*|| / ||x*|| in the discrete 2-norm.
double relative_error(const Vector& x, const Vector& ref);

}  // namespace licon::qmri
