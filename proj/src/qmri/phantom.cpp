#include "licon/qmri/phantom.hpp"

#include "licon/csv.hpp"
#include "licon/errors.hpp"

#include <cmath>
#include <fstream>

namespace licon::qmri {

QmriImage::QmriImage(Grid2D g)
    : grid(g), T1(Vector::Zero(g.size())), T2(Vector::Zero(g.size())), rho(Vector::Zero(g.size())) {}

Vector QmriImage::stacked() const {
    Vector u(3 * pixels());
    u << T1, T2, rho;
    return u;
}

QmriImage QmriImage::from_stacked(const Grid2D& grid, const Vector& u) {
    require(u.size() == 3 * grid.size(), "QmriImage::from_stacked: size mismatch");
    QmriImage img(grid);
    const int n = grid.size();
    img.T1 = u.segment(0, n);
    img.T2 = u.segment(n, n);
    img.rho = u.segment(2 * n, n);
    return img;
}

void QmriImage::check() const {
    const Eigen::Index n = grid.size();
    require(T1.size() == n && T2.size() == n && rho.size() == n, "QmriImage: map size does not match grid");
    require(T1.allFinite() && T2.allFinite() && rho.allFinite(), "QmriImage: non-finite parameter");
}

Grid2D image_grid(int n) {
    require(n >= 2, "image_grid: need at least 2 pixels per side");
    return Grid2D(n, n, 1.0 / (n - 1));
}

namespace {

struct Ellipse {
    double cx, cy, ax, ay;
    bool contains(double x, double y) const {
        const double u = (x - cx) / ax, v = (y - cy) / ay;
        return u * u + v * v <= 1.0;
    }
};

}  // namespace

QmriImage synth_phantom(int n) {
    QmriImage img(image_grid(n));
    const Grid2D& g = img.grid;
    const Ellipse head{0.5, 0.5, 0.42, 0.46};
    const Ellipse brain{0.5, 0.5, 0.36, 0.40};
    const Ellipse grey_left{0.33, 0.6, 0.09, 0.14};
    const Ellipse grey_right{0.67, 0.6, 0.09, 0.14};
    const Ellipse grey_low{0.5, 0.25, 0.16, 0.07};
    const Ellipse ventricle_left{0.44, 0.5, 0.04, 0.12};
    const Ellipse ventricle_right{0.56, 0.5, 0.04, 0.12};
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double x = g.x(i), y = g.y(j);
            const int k = g.index(i, j);
            double t1 = 1000.0, t2 = 80.0, rho = 2500.0;  // surrounding soft tissue
            if (head.contains(x, y)) t1 = 400.0, t2 = 60.0, rho = 3000.0;
            if (brain.contains(x, y)) t1 = 800.0, t2 = 70.0, rho = 3600.0;
            if (grey_left.contains(x, y) || grey_right.contains(x, y) || grey_low.contains(x, y))
                t1 = 1300.0, t2 = 110.0, rho = 4300.0;
            if (ventricle_left.contains(x, y) || ventricle_right.contains(x, y)) t1 = 3500.0, t2 = 1200.0, rho = 5500.0;
            img.T1[k] = t1;
            img.T2[k] = t2;
            img.rho[k] = rho;
        }
    return img;
}

void save_phantom(const std::string& path, const QmriImage& img) {
    img.check();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_phantom: cannot open " + path);
    out << "i,j,T1,T2,rho\n";
    const Grid2D& g = img.grid;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const int k = g.index(i, j);
            out << i << ',' << j << ',' << format_double(img.T1[k]) << ',' << format_double(img.T2[k]) << ','
                << format_double(img.rho[k]) << '\n';
        }
}

QmriImage load_phantom(const std::string& path) {
    const auto rows = read_numeric_csv(path, 1);
    if (rows.empty()) throw ParseError("phantom has no pixels", 2, 1);
    if (rows.front().size() != 5) throw ParseError("phantom rows need 5 columns (i,j,T1,T2,rho)", 2, 1);
    const double count = static_cast<double>(rows.size());
    const int n = static_cast<int>(std::lround(std::sqrt(count)));
    if (n < 2 || static_cast<std::size_t>(n) * n != rows.size())
        throw ParseError("pixel count " + std::to_string(rows.size()) + " is not a square", 2, 1);
    QmriImage img(image_grid(n));
    std::vector<char> seen(rows.size(), 0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const int line = static_cast<int>(r) + 2;
        const double fi = rows[r][0], fj = rows[r][1];
        if (fi != std::floor(fi) || fi < 0 || fi >= n) throw ParseError("pixel index i out of range", line, 1);
        if (fj != std::floor(fj) || fj < 0 || fj >= n) throw ParseError("pixel index j out of range", line, 1);
        const int k = img.grid.index(static_cast<int>(fi), static_cast<int>(fj));
        if (seen[k]) throw ParseError("duplicate pixel", line, 1);
        seen[k] = 1;
        img.T1[k] = rows[r][2];
        img.T2[k] = rows[r][3];
        img.rho[k] = rows[r][4];
    }
    return img;
}

double relative_error(const Vector& x, const Vector& ref) {
    require(x.size() == ref.size(), "relative_error: size mismatch");
    const double d = ref.norm();
    require(d > 0.0, "relative_error: zero reference");
    return (x - ref).norm() / d;
}

}  // namespace licon::qmri
