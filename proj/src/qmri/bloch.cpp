#include "licon/qmri/bloch.hpp"

#include "licon/errors.hpp"

#include <cmath>
#include <string>

namespace licon::qmri {

SequenceSpec SequenceSpec::standard() {
    SequenceSpec s;
    const double pi = std::acos(-1.0);
    s.TR = 8.0;
    s.flips.assign(s.L, pi / 4.0);
    s.phase = 3.0 * pi / 4.0;
    return s;
}

void SequenceSpec::check() const {
    require(L >= 1, "SequenceSpec: L must be at least 1");
    require(static_cast<int>(flips.size()) == L, "SequenceSpec: need one flip angle per readout");
    require(std::isfinite(TR) && TR >= 0.0, "SequenceSpec: TR must be finite and nonnegative");
    for (double a : flips) require(std::isfinite(a), "SequenceSpec: flip angles must be finite");
    require(std::isfinite(phase) && M0.allFinite() && std::isfinite(m_e), "SequenceSpec: non-finite parameter");
}

namespace {

// exp(-TR / T) and its T-derivative, extended by 0 at T = 0.
void relaxation(double TR, double T, double& E, double& dE) {
    if (T <= 0.0) {
        E = TR > 0.0 ? 0.0 : 1.0;
        dE = 0.0;
        return;
    }
    E = std::exp(-TR / T);
    dE = E * TR / (T * T);
}

// Flow of dM/dt = M x (theta e_x) over unit time.
Vector3 rot_x(double theta, const Vector3& m) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {m[0], c * m[1] + s * m[2], -s * m[1] + c * m[2]};
}

// Flow of dM/dt = M x (phi e_z) over unit time.
Vector3 rot_z(double phi, const Vector3& m) {
    const double c = std::cos(phi), s = std::sin(phi);
    return {c * m[0] + s * m[1], -s * m[0] + c * m[1], m[2]};
}

}  // namespace

Series bloch_series_extended(double T1, double T2, const SequenceSpec& seq, Series* dT1, Series* dT2) {
    seq.check();
    require(T1 >= 0.0 && T2 >= 0.0, "bloch_series: T1 and T2 must be nonnegative");
    double E1, dE1, E2, dE2;
    relaxation(seq.TR, T1, E1, dE1);
    relaxation(seq.TR, T2, E2, dE2);

    Series out(seq.L, 3);
    if (dT1) dT1->resize(seq.L, 3);
    if (dT2) dT2->resize(seq.L, 3);
    Vector3 m = seq.M0, d1 = Vector3::Zero(), d2 = Vector3::Zero();
    for (int l = 1; l <= seq.L; ++l) {
        const double theta = (l % 2 == 0 ? 1.0 : -1.0) * seq.flips[l - 1];
        const Vector3 a = rot_x(theta, m);
        const Vector3 a1 = rot_x(theta, d1);
        const Vector3 a2 = rot_x(theta, d2);
        const Vector3 e(E2 * a[0], E2 * a[1], E1 * a[2]);
        m = rot_z(seq.phase, e);
        m[2] += (1.0 - E1) * seq.m_e;
        // Chain rule: d/dT [diag(E) a + (1 - E1) m_e e3].
        const Vector3 g1(E2 * a1[0], E2 * a1[1], E1 * a1[2] + dE1 * (a[2] - seq.m_e));
        const Vector3 g2(E2 * a2[0] + dE2 * a[0], E2 * a2[1] + dE2 * a[1], E1 * a2[2]);
        d1 = rot_z(seq.phase, g1);
        d2 = rot_z(seq.phase, g2);
        out.row(l - 1) = m.transpose();
        if (dT1) dT1->row(l - 1) = d1.transpose();
        if (dT2) dT2->row(l - 1) = d2.transpose();
    }
    return out;
}

Series bloch_series(double T1, double T2, const SequenceSpec& seq) {
    require(T1 > 0.0 && T2 > 0.0, "bloch_series: T1 and T2 must be positive");
    return bloch_series_extended(T1, T2, seq);
}

SeriesDerivative bloch_derivative(double T1, double T2, const SequenceSpec& seq) {
    require(T1 > 0.0 && T2 > 0.0, "bloch_derivative: T1 and T2 must be positive");
    SeriesDerivative d;
    bloch_series_extended(T1, T2, seq, &d.dT1, &d.dT2);
    return d;
}

std::vector<double> colon_range(double lo, double step, double hi) {
    require(step > 0.0, "colon_range: step must be positive");
    std::vector<double> v;
    const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-10));
    for (long k = 0; k <= n; ++k) v.push_back(lo + k * step);
    return v;
}

Dictionary build_dictionary(const std::vector<double>& T1_grid, const std::vector<double>& T2_grid,
                            const SequenceSpec& seq) {
    require(!T1_grid.empty() && !T2_grid.empty(), "build_dictionary: empty parameter grid");
    Dictionary d;
    for (double t1 : T1_grid)
        for (double t2 : T2_grid) {
            d.T1.push_back(t1);
            d.T2.push_back(t2);
            d.series.push_back(bloch_series_extended(t1, t2, seq));
        }
    return d;
}

Dictionary standard_dictionary(const std::string& size, const SequenceSpec& seq) {
    if (size == "small") return build_dictionary(colon_range(0, 400, 5000), colon_range(0, 100, 1800), seq);
    if (size == "medium") return build_dictionary(colon_range(0, 200, 5000), colon_range(0, 50, 1800), seq);
    if (size == "large") return build_dictionary(colon_range(0, 50, 5000), colon_range(0, 20, 1800), seq);
    throw ContractViolation("unknown dictionary size '" + size + "' (small, medium, large)");
}

}  // namespace licon::qmri
