#include "psq/oracles.hpp"

#include "psq/error.hpp"
#include "psq/starnum.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace psq {

namespace {

constexpr double pi = std::numbers::pi;
constexpr cplx I(0.0, 1.0);

void require_reach(const Axis& a, double center, double width, const char* what) {
    double lo = center - 5.0 * width, hi = center + 5.0 * width;
    if (lo < a.lo || hi > a.hi - a.step())
        throw NumericalPrecondition(std::string("free_gaussian: grid span too small in ") + what + ": need [" +
                                    std::to_string(lo) + ", " + std::to_string(hi) + "] (five widths each side)");
}

void require_laguerre_line(const OscillatorParams& q, const char* where) {
    if (!(q.omega > 0.0)) throw InvalidArgument(std::string(where) + ": omega must be positive");
    if (std::abs(q.sigma - 0.5) > 1e-14)
        throw InvalidArgument(std::string(where) + ": closed form needs sigma = 1/2");
    if (std::abs(q.beta - q.omega * q.omega * q.alpha) > 1e-12 * (1.0 + std::abs(q.beta)))
        throw InvalidArgument(std::string(where) + ": closed form needs beta = omega^2 alpha");
    double l = q.lambda();
    if (std::abs(l) < 1e-12 || std::abs(l - 1.0) < 1e-12)
        throw InvalidArgument(std::string(where) + ": lambda must differ from 0 and 1");
}

// Generalized Laguerre L_n^s(u), s >= 0, by the three-term recurrence.
double laguerre(int n, int s, double u) {
    double l0 = 1.0;
    if (n == 0) return l0;
    double l1 = 1.0 + s - u;
    for (int k = 1; k < n; ++k) {
        double l2 = ((2 * k + 1 + s - u) * l1 - (k + s) * l0) / (k + 1);
        l0 = l1;
        l1 = l2;
    }
    return l1;
}

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

double rel_residual(const PhaseField& lhs, const PhaseField& rhs) {
    return l2_norm(lhs - rhs) / l2_norm(rhs);
}

} // namespace

OrderingSpec OscillatorParams::spec() const {
    if (alpha == 0.0 && beta == 0.0) return {sigma, IdentitySmoother{}};
    return OrderingSpec::gaussian(sigma, alpha, beta);
}

PolyH annihilation_symbol(double omega, double hbar) {
    double c = 1.0 / std::sqrt(2.0 * hbar * omega);
    return PolyH::monomial(1, 0, 0, c * omega) + PolyH::monomial(0, 1, 0, I * c);
}

PolyH creation_symbol(double omega, double hbar) {
    double c = 1.0 / std::sqrt(2.0 * hbar * omega);
    return PolyH::monomial(1, 0, 0, c * omega) + PolyH::monomial(0, 1, 0, -I * c);
}

PolyH oscillator_hamiltonian(double omega) {
    return PolyH::monomial(0, 2, 0, 0.5) + PolyH::monomial(2, 0, 0, 0.5 * omega * omega);
}

WaveFunction free_gaussian_wave(const FreeGaussianParams& q, double t, const Axis& axis, double hbar) {
    if (!(q.delta_p > 0.0)) throw InvalidArgument("free_gaussian: delta_p must be positive");
    double dx = q.delta_x(hbar);
    double a = 1.0 / (4.0 * dx * dx);
    double k = q.p0 / hbar;
    cplx d = 1.0 + 2.0 * I * a * hbar * t;
    cplx pre = std::pow(2.0 * pi * dx * dx, -0.25) / std::sqrt(d);
    return WaveFunction::sample(axis, hbar, [&](double x) -> cplx {
        return pre * std::exp((-a * x * x + I * k * x - I * hbar * k * k * t / 2.0) / d);
    });
}

QuasiDistribution free_gaussian(const FreeGaussianParams& q, double t, const PhaseGrid& grid) {
    if (!(q.delta_p > 0.0)) throw InvalidArgument("free_gaussian: delta_p must be positive");
    double hbar = grid.hbar;
    double dxw = q.delta_x(hbar), dp = q.delta_p;
    require_reach(grid.x, q.p0 * t, std::sqrt(dxw * dxw + dp * dp * t * t), "x");
    require_reach(grid.p, q.p0, dp, "p");

    double s = q.sigma, sb = 1.0 - s;
    double ss = sb * sb + s * s;
    double c = 1.0 - 2.0 * s;
    cplx pre = 1.0 / std::sqrt(2.0 * pi * (ss * dxw * dp + I * c * dp * dp * t));
    cplx den = 4.0 * ss * dxw * dxw + 4.0 * I * c * dxw * dp * t;
    PhaseField f = PhaseField::sample(grid, [&](double x, double p) -> cplx {
        double u = p - q.p0;
        cplx w = x - p * t + I * c * (dxw / dp) * u;
        return pre * std::exp(-u * u / (2.0 * dp * dp) - w * w / den);
    });
    QuasiDistribution out;
    out.psi_field = std::move(f);
    out.spec = {q.sigma, IdentitySmoother{}};
    out.normalized = true;
    return out;
}

namespace {

PhaseField printed_ground(const OscillatorParams& q, const PhaseGrid& grid) {
    double s = q.sigma, sb = 1.0 - s, w = q.omega, a = q.alpha, b = q.beta, h = grid.hbar;
    double den = sb * sb + s * s + 2 * a * b + w * a + b / w;
    double num = std::sqrt((1 - 2 * s) * (1 - 2 * s) + (1 + 2 * w * a) * (1 + 2 * b / w));
    double pre = num / (std::sqrt(2 * pi * h) * den);
    return PhaseField::sample(grid, [&](double x, double p) -> cplx {
        cplx e = (-(1 + 2 * b / w) * w * w * x * x - (1 + 2 * w * a) * p * p - 2.0 * I * (1 - 2 * s) * w * x * p) /
                 (2 * h * w * den);
        return pre * std::exp(e);
    });
}

} // namespace

double ho_ground_measured_normalization(const OscillatorParams& q, const PhaseGrid& grid) {
    if (!(q.omega > 0.0)) throw InvalidArgument("ho_ground: omega must be positive");
    return integrate(printed_ground(q, grid)).real() / std::sqrt(2 * pi * grid.hbar);
}

QuasiDistribution ho_ground(const OscillatorParams& q, const PhaseGrid& grid) {
    if (!(q.omega > 0.0)) throw InvalidArgument("ho_ground: omega must be positive");
    PhaseField f = printed_ground(q, grid);
    double c = integrate(f).real() / std::sqrt(2 * pi * grid.hbar);
    if (!(c > 0.0) || !std::isfinite(c))
        throw NumericalPrecondition("ho_ground: non-positive integral; parameters give no normalizable state");
    f *= 1.0 / c;
    return {std::move(f), q.spec(), true, std::nullopt};
}

QuasiDistribution ho_state(int m, int n, const OscillatorParams& q, const PhaseGrid& grid) {
    require_laguerre_line(q, "ho_state");
    if (m < 0 || n < 0 || m > 12 || n > 12) throw InvalidArgument("ho_state: indices must lie in [0, 12]");
    if (m < n) {
        // Psi_mn is the involution of Psi_nm, which for sigma = 1/2 and a real
        // even smoother is complex conjugation.
        QuasiDistribution t = ho_state(n, m, q, grid);
        t.psi_field = t.psi_field.conj();
        return t;
    }
    double h = grid.hbar, w = q.omega, l = q.lambda(), lb = q.lambda_bar();
    int k = m - n;
    double pre = std::pow(-1.0, n) * std::sqrt(factorial(n) / factorial(m)) * std::pow(lb, n) / std::pow(l, m) /
                 (std::sqrt(2 * pi * h) * l);
    PhaseField f = PhaseField::sample(grid, [&](double x, double p) -> cplx {
        double r2 = w * w * x * x + p * p;
        double r = std::sqrt(r2);
        double theta = std::atan2(p, w * x);
        double rad = std::pow(r / std::sqrt(2 * h * w), k) * laguerre(n, k, r2 / (2 * h * w * l * lb)) *
                     std::exp(-r2 / (2 * h * w * l));
        return pre * rad * std::exp(-I * double(k) * theta);
    });
    return {std::move(f), q.spec(), m == n, std::nullopt};
}

QuasiDistribution ho_ladder(int m, int n, const OscillatorParams& q, const PhaseGrid& grid) {
    require_laguerre_line(q, "ho_ladder");
    if (m < 0 || n < 0 || m + n > 8) throw InvalidArgument("ho_ladder: needs m, n >= 0 and m + n <= 8");
    QuasiDistribution g = ho_state(0, 0, q, grid);
    OrderingSpec spec = q.spec();
    ObservableSpec create(creation_symbol(q.omega, grid.hbar));
    ObservableSpec annihilate(annihilation_symbol(q.omega, grid.hbar));
    PhaseField f = g.psi_field;
    for (int i = 0; i < m; ++i) f = bopp_apply(create, f, Side::left, spec);
    for (int i = 0; i < n; ++i) f = bopp_apply(annihilate, f, Side::right, spec);
    f *= 1.0 / std::sqrt(factorial(m) * factorial(n));
    return {std::move(f), spec, m == n, std::nullopt};
}

CoherentResult coherent_state(const CoherentParams& q, const PhaseGrid& grid) {
    if (!(q.omega > 0.0)) throw InvalidArgument("coherent_state: omega must be positive");
    double h = grid.hbar, w = q.omega, s = q.sigma, sb = 1.0 - s;
    double ss = sb * sb + s * s;
    double pre = 1.0 / std::sqrt(pi * h * ss);
    PhaseField f = PhaseField::sample(grid, [&](double x, double p) -> cplx {
        double X = x - q.x_bar, P = p - q.p_bar;
        cplx e = (-w * w * X * X - P * P + 2.0 * I * (2 * s - 1) * w * X * P) / (2 * h * w * ss);
        return pre * std::exp(e);
    });

    CoherentResult out;
    out.state = {std::move(f), {s, IdentitySmoother{}}, true, std::nullopt};
    cplx z = (w * q.x_bar + I * q.p_bar) / std::sqrt(2 * h * w);
    const PhaseField& psi = out.state.psi_field;
    PhaseField left = bopp_apply(ObservableSpec(annihilation_symbol(w, h)), psi, Side::left, out.state.spec);
    PhaseField right = bopp_apply(ObservableSpec(creation_symbol(w, h)), psi, Side::right, out.state.spec);
    out.left_residual = rel_residual(left, z * psi);
    out.right_residual = rel_residual(right, std::conj(z) * psi);
    return out;
}

double coherent_center_x(const CoherentParams& q, double t) {
    return q.x_bar * std::cos(q.omega * t) + q.p_bar / q.omega * std::sin(q.omega * t);
}

double coherent_center_p(const CoherentParams& q, double t) {
    return -q.omega * q.x_bar * std::sin(q.omega * t) + q.p_bar * std::cos(q.omega * t);
}

QuasiDistribution smoothed_plane_wave(double p0, double beta, const PhaseGrid& grid) {
    if (!(beta > 0.0)) throw InvalidArgument("smoothed_plane_wave: beta must be positive");
    double h = grid.hbar;
    PhaseField f = PhaseField::sample(grid, [&](double, double p) -> cplx {
        return std::exp(-(p - p0) * (p - p0) / (2 * h * beta)) / (2 * pi * h * std::sqrt(beta));
    });
    return {std::move(f), OrderingSpec::gaussian(0.5, 0.0, beta), false, std::nullopt};
}

std::vector<cplx> classical_limit_probe(const std::function<QuasiDistribution(double)>& family,
                                        const std::function<double(double, double)>& testfn,
                                        const std::vector<double>& hbars) {
    std::vector<cplx> out;
    out.reserve(hbars.size());
    for (double h : hbars) {
        QuasiDistribution q = family(h);
        PhaseField phi = PhaseField::sample(q.psi_field.grid, [&](double x, double p) -> cplx { return testfn(x, p); });
        out.push_back(integrate(hadamard(q.rho(), phi)));
    }
    return out;
}

} // namespace psq
