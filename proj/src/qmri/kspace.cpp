#include "licon/qmri/kspace.hpp"

#include "licon/csv.hpp"
#include "licon/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace licon::qmri {

namespace {

std::string stem_name(const std::string& stem) {
    const auto slash = stem.find_last_of('/');
    return slash == std::string::npos ? stem : stem.substr(slash + 1);
}

}  // namespace

static_assert(std::endian::native == std::endian::little, "k-space IO assumes a little-endian host");

bool KSpaceData::fully_sampled() const {
    for (const Mask& m : masks)
        if (std::find(m.begin(), m.end(), static_cast<unsigned char>(0)) != m.end()) return false;
    return true;
}

long long KSpaceData::samples() const {
    long long n = 0;
    for (Eigen::Index l = 0; l < frames.cols(); ++l) n += std::count(mask(l).begin(), mask(l).end(), 1);
    return n;
}

void KSpaceData::check() const {
    require(nx > 0 && ny > 0, "KSpaceData: empty image size");
    require(frames.rows() == size() && frames.cols() > 0, "KSpaceData: frame matrix has the wrong shape");
    require(masks.size() == 1 || static_cast<Eigen::Index>(masks.size()) == frames.cols(),
            "KSpaceData: need one shared mask or one mask per frame");
    for (const Mask& m : masks) require(static_cast<int>(m.size()) == size(), "KSpaceData: mask size differs from the image size");
}

Mask full_mask(int nx, int ny) {
    require(nx > 0 && ny > 0, "full_mask: empty image size");
    return Mask(static_cast<std::size_t>(nx) * ny, 1);
}

Mask cartesian_row_mask(int nx, int ny, double density, std::uint64_t seed) {
    require(nx > 0 && ny > 0, "cartesian_row_mask: empty image size");
    require(density > 0.0 && density <= 1.0, "cartesian_row_mask: density must lie in (0, 1]");
    const int rows = std::max(1, static_cast<int>(std::lround(density * ny)));
    const int central = std::max(1, rows / 4);
    std::vector<int> order(ny);
    std::iota(order.begin(), order.end(), 0);
    auto freq = [ny](int j) { return j < (ny + 1) / 2 ? j : ny - j; };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return freq(a) < freq(b); });
    std::vector<unsigned char> take(ny, 0);
    for (int k = 0; k < central; ++k) take[order[k]] = 1;
    std::vector<int> rest(order.begin() + central, order.end());
    std::mt19937_64 rng(seed);
    std::shuffle(rest.begin(), rest.end(), rng);
    for (int k = 0; k < rows - central; ++k) take[rest[k]] = 1;
    Mask mask(static_cast<std::size_t>(nx) * ny, 0);
    for (int j = 0; j < ny; ++j)
        if (take[j]) std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(j) * nx, nx, 1);
    return mask;
}

std::vector<Mask> cartesian_row_masks(int nx, int ny, double density, std::uint64_t seed, int frames, bool shared) {
    require(frames > 0, "cartesian_row_masks: need at least one frame");
    std::vector<Mask> masks;
    for (int l = 0; l < (shared ? 1 : frames); ++l)
        masks.push_back(cartesian_row_mask(nx, ny, density, seed + static_cast<std::uint64_t>(l)));
    return masks;
}

void apply_masks(CMatrix& K, const std::vector<Mask>& masks) {
    require(masks.size() == 1 || static_cast<Eigen::Index>(masks.size()) == K.cols(), "apply_masks: mask count");
    for (Eigen::Index l = 0; l < K.cols(); ++l) {
        const Mask& m = masks.size() == 1 ? masks.front() : masks[l];
        require(static_cast<Eigen::Index>(m.size()) == K.rows(), "apply_masks: mask size");
        for (Eigen::Index p = 0; p < K.rows(); ++p)
            if (!m[p]) K(p, l) = 0.0;
    }
}

CMatrix simulate_frames(const QmriImage& img, const SignalModel& model, const UnitaryDft2& dft,
                        const std::vector<Mask>& masks) {
    img.check();
    require(dft.size() == img.pixels(), "simulate_frames: image and transform sizes differ");
    CMatrix s;
    model.evaluate(img.T1, img.T2, s, nullptr, nullptr);
    CMatrix k = dft.forward(CMatrix(img.rho.asDiagonal() * s));
    apply_masks(k, masks);
    return k;
}

KSpaceData simulate_kspace(const QmriImage& img, const SignalModel& model, const std::vector<Mask>& masks) {
    KSpaceData d;
    d.nx = img.grid.nx();
    d.ny = img.grid.ny();
    const UnitaryDft2 dft(d.nx, d.ny);
    d.frames = simulate_frames(img, model, dft, masks);
    d.masks = masks;
    d.check();
    return d;
}

void add_noise(KSpaceData& data, double sigma, std::uint64_t seed) {
    data.check();
    require(sigma >= 0.0, "add_noise: sigma must be non-negative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, sigma);
    for (Eigen::Index l = 0; l < data.frames.cols(); ++l)
        for (Eigen::Index p = 0; p < data.frames.rows(); ++p)
            if (data.mask(static_cast<int>(l))[p]) {
                const double re = nd(rng);
                const double im = nd(rng);
                data.frames(p, l) += std::complex<double>(re, im);
            }
    data.sigma = sigma;
    data.seed = seed;
}

void save_kspace(const std::string& stem, const KSpaceData& data) {
    data.check();
    {
        std::ofstream out(stem + ".bin", std::ios::binary);
        if (!out) throw std::runtime_error("save_kspace: cannot open " + stem + ".bin");
        std::vector<float> buf(2 * static_cast<std::size_t>(data.size()));
        for (Eigen::Index l = 0; l < data.frames.cols(); ++l) {
            for (Eigen::Index p = 0; p < data.frames.rows(); ++p) {
                buf[2 * p] = static_cast<float>(data.frames(p, l).real());
                buf[2 * p + 1] = static_cast<float>(data.frames(p, l).imag());
            }
            out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
        }
    }
    nlohmann::json meta = {{"nx", data.nx},
                           {"ny", data.ny},
                           {"frames", data.frames.cols()},
                           {"dtype", "complex64"},
                           {"byte_order", "little"},
                           {"layout", "frame-major, row-major pixels"},
                           {"masks", data.masks.size()},
                           {"mask_file", stem_name(stem) + "_mask.csv"},
                           {"sampled", data.samples()},
                           {"sigma", data.sigma},
                           {"seed", data.seed}};
    std::ofstream js(stem + ".json");
    if (!js) throw std::runtime_error("save_kspace: cannot open " + stem + ".json");
    js << meta.dump(2) << '\n';
    std::ofstream mask(stem + "_mask.csv");
    if (!mask) throw std::runtime_error("save_kspace: cannot open " + stem + "_mask.csv");
    for (const Mask& m : data.masks)
        for (int j = 0; j < data.ny; ++j)
            for (int i = 0; i < data.nx; ++i)
                mask << static_cast<int>(m[static_cast<std::size_t>(j) * data.nx + i]) << (i + 1 < data.nx ? ',' : '\n');
}

KSpaceData load_kspace(const std::string& stem) {
    std::ifstream js(stem + ".json");
    if (!js) throw std::runtime_error("load_kspace: cannot open " + stem + ".json");
    nlohmann::json meta;
    try {
        js >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("load_kspace: bad sidecar: ") + e.what(), 1, 1);
    }
    KSpaceData d;
    int L = 0;
    std::size_t nmasks = 1;
    try {
        d.nx = meta.at("nx").get<int>();
        d.ny = meta.at("ny").get<int>();
        L = meta.at("frames").get<int>();
        nmasks = meta.value("masks", std::size_t{1});
        d.sigma = meta.value("sigma", 0.0);
        d.seed = meta.value("seed", std::uint64_t{0});
        if (meta.at("dtype").get<std::string>() != "complex64") throw ParseError("load_kspace: dtype must be complex64", 1, 1);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("load_kspace: bad sidecar: ") + e.what(), 1, 1);
    }
    if (d.nx <= 0 || d.ny <= 0 || L <= 0) throw ParseError("load_kspace: non-positive sizes in sidecar", 1, 1);

    std::ifstream in(stem + ".bin", std::ios::binary);
    if (!in) throw std::runtime_error("load_kspace: cannot open " + stem + ".bin");
    d.frames.resize(d.size(), L);
    std::vector<float> buf(2 * static_cast<std::size_t>(d.size()));
    for (int l = 0; l < L; ++l) {
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
        if (in.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(float)))
            throw ParseError("load_kspace: binary file shorter than the sidecar states", l + 1, 1);
        for (int p = 0; p < d.size(); ++p) d.frames(p, l) = {buf[2 * p], buf[2 * p + 1]};
    }

    const auto m = read_numeric_csv(stem + "_mask.csv", 0);
    if (nmasks != 1 && nmasks != static_cast<std::size_t>(L))
        throw ParseError("load_kspace: mask count must be 1 or the frame count", 1, 1);
    if (m.size() != nmasks * static_cast<std::size_t>(d.ny))
        throw ParseError("load_kspace: mask row count differs from the sidecar", 1, 1);
    d.masks.assign(nmasks, Mask(d.size(), 0));
    for (std::size_t r = 0; r < m.size(); ++r) {
        if (static_cast<int>(m[r].size()) != d.nx)
            throw ParseError("load_kspace: mask row length differs from the sidecar", static_cast<int>(r) + 1, 1);
        const std::size_t q = r / d.ny, j = r % d.ny;
        for (int i = 0; i < d.nx; ++i) {
            const double v = m[r][i];
            if (v != 0.0 && v != 1.0)
                throw ParseError("load_kspace: mask entries must be 0 or 1", static_cast<int>(r) + 1, i + 1);
            d.masks[q][j * d.nx + i] = static_cast<unsigned char>(v);
        }
    }
    for (int l = 0; l < L; ++l) {
        const Mask& mk = d.mask(l);
        for (int p = 0; p < d.size(); ++p)
            if (!mk[p] && d.frames(p, l) != std::complex<double>(0.0))
                throw ParseError("load_kspace: nonzero data at an unsampled entry", l + 1, p + 1);
    }
    return d;
}

}  // namespace licon::qmri
