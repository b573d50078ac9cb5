#include "psq/gridcore.hpp"

#include "fourier_detail.hpp"
#include "psq/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace psq {

namespace {

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

constexpr double two_pi = 2.0 * std::numbers::pi;

} // namespace

double Axis::conj_step(double hbar) const {
    return two_pi * hbar / (static_cast<double>(n) * step());
}

Axis make_axis(std::size_t n, double lo, double hi) {
    if (!is_power_of_two(n)) throw InvalidArgument("size not a power of two");
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo))
        throw InvalidArgument("empty or non-finite span");
    return Axis{n, lo, hi};
}

PhaseGrid make_grid(std::size_t nx, std::size_t np, double x_min, double x_max,
                    double p_min, double p_max, double hbar) {
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw InvalidArgument("hbar must be positive");
    return PhaseGrid{make_axis(nx, x_min, x_max), make_axis(np, p_min, p_max), hbar};
}

PhaseField::PhaseField(const PhaseGrid& g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw InvalidArgument("field length does not match grid");
}

PhaseField PhaseField::sample(const PhaseGrid& g, const std::function<cplx(double, double)>& f) {
    PhaseField out(g);
    for (std::size_t i = 0; i < g.nx(); ++i) {
        double x = g.x.point(i);
        for (std::size_t j = 0; j < g.np(); ++j) out(i, j) = f(x, g.p.point(j));
    }
    return out;
}

PhaseField& PhaseField::operator+=(const PhaseField& o) {
    require_same_grid(*this, o, "field addition");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
}

PhaseField& PhaseField::operator-=(const PhaseField& o) {
    require_same_grid(*this, o, "field subtraction");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
}

PhaseField& PhaseField::operator*=(cplx s) {
    for (auto& v : values) v *= s;
    return *this;
}

PhaseField PhaseField::conj() const {
    PhaseField out = *this;
    for (auto& v : out.values) v = std::conj(v);
    return out;
}

bool PhaseField::all_finite() const {
    return std::all_of(values.begin(), values.end(),
                       [](cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

PhaseField operator+(PhaseField a, const PhaseField& b) { return a += b; }
PhaseField operator-(PhaseField a, const PhaseField& b) { return a -= b; }
PhaseField operator*(cplx s, PhaseField a) { return a *= s; }
PhaseField operator*(PhaseField a, cplx s) { return a *= s; }

PhaseField hadamard(const PhaseField& a, const PhaseField& b) {
    require_same_grid(a, b, "pointwise product");
    PhaseField out(a.grid);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = a.values[i] * b.values[i];
    return out;
}

WaveFunction::WaveFunction(const Axis& a, double h, std::vector<cplx> v)
    : axis(a), hbar(h), values(std::move(v)) {
    if (values.size() != axis.n) throw InvalidArgument("wavefunction length does not match axis");
}

WaveFunction WaveFunction::sample(const Axis& a, double h, const std::function<cplx(double)>& f) {
    std::vector<cplx> v(a.n);
    for (std::size_t i = 0; i < a.n; ++i) v[i] = f(a.point(i));
    return WaveFunction(a, h, std::move(v));
}

double WaveFunction::norm() const { return std::sqrt(inner(*this).real()); }

cplx WaveFunction::inner(const WaveFunction& o) const {
    if (!(axis == o.axis) || hbar != o.hbar) throw GridMismatch("wavefunction inner product: axis mismatch");
    cplx s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += std::conj(values[i]) * o.values[i];
    return s * axis.step();
}

WaveFunction& WaveFunction::operator+=(const WaveFunction& o) {
    if (!(axis == o.axis) || hbar != o.hbar) throw GridMismatch("wavefunction addition: axis mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
}

WaveFunction& WaveFunction::operator*=(cplx s) {
    for (auto& v : values) v *= s;
    return *this;
}

WaveFunction operator+(WaveFunction a, const WaveFunction& b) { return a += b; }
WaveFunction operator-(WaveFunction a, const WaveFunction& b) { return a += (-1.0) * b; }
WaveFunction operator*(cplx s, WaveFunction a) { return a *= s; }

void require_same_grid(const PhaseField& a, const PhaseField& b, const char* where) {
    if (!(a.grid == b.grid)) throw GridMismatch(std::string(where) + ": grid mismatch");
}

void require_finite(const PhaseField& f, const char* where) {
    if (!f.all_finite()) throw NumericalPrecondition(std::string(where) + ": non-finite samples");
}

SpectralField fourier_full(const PhaseField& f) {
    SpectralField s{f.grid, f.values};
    detail::to_conjugate(s.values.data(), f.grid.p, f.grid.hbar, +1, detail::p_lines(f.grid));
    detail::to_conjugate(s.values.data(), f.grid.x, f.grid.hbar, -1, detail::x_lines(f.grid));
    return s;
}

PhaseField inverse_fourier_full(const SpectralField& s) {
    PhaseField f(s.grid, s.values);
    detail::from_conjugate(f.values.data(), s.grid.x, s.grid.hbar, -1, detail::x_lines(s.grid));
    detail::from_conjugate(f.values.data(), s.grid.p, s.grid.hbar, +1, detail::p_lines(s.grid));
    return f;
}

PhaseField fourier_partial(const PhaseField& f, FourierAxis axis, Direction dir) {
    PhaseField out = f;
    const PhaseGrid& g = f.grid;
    if (axis == FourierAxis::x) {
        if (dir == Direction::forward)
            detail::to_conjugate(out.values.data(), g.x, g.hbar, -1, detail::x_lines(g));
        else
            detail::from_conjugate(out.values.data(), g.x, g.hbar, -1, detail::x_lines(g));
    } else {
        if (dir == Direction::forward)
            detail::from_conjugate(out.values.data(), g.p, g.hbar, +1, detail::p_lines(g));
        else
            detail::to_conjugate(out.values.data(), g.p, g.hbar, +1, detail::p_lines(g));
    }
    return out;
}

namespace {

// Multiplier (i k/hbar)^order with the Nyquist mode dropped for odd orders.
std::vector<cplx> derivative_multiplier(const Axis& axis, double hbar, int order, int sign) {
    std::vector<cplx> m(axis.n);
    for (std::size_t k = 0; k < axis.n; ++k) {
        if (order % 2 == 1 && k == 0) {
            m[k] = 0.0;
            continue;
        }
        m[k] = std::pow(cplx(0.0, sign * axis.conj_point(k, hbar) / hbar), order);
    }
    return m;
}

void differentiate_lines(cplx* data, const Axis& axis, double hbar, int order, detail::Lines lines) {
    if (order == 0) return;
    // Kernel e^{-i u k/hbar}: d/du <-> i k/hbar.
    detail::to_conjugate(data, axis, hbar, -1, lines);
    auto m = derivative_multiplier(axis, hbar, order, +1);
    for (std::size_t b = 0; b < lines.count; ++b)
        for (std::size_t k = 0; k < axis.n; ++k) data[b * lines.dist + k * lines.stride] *= m[k];
    detail::from_conjugate(data, axis, hbar, -1, lines);
}

} // namespace

PhaseField spectral_derivative(const PhaseField& f, int nx_order, int np_order) {
    PhaseField out = f;
    differentiate_lines(out.values.data(), f.grid.x, f.grid.hbar, nx_order, detail::x_lines(f.grid));
    differentiate_lines(out.values.data(), f.grid.p, f.grid.hbar, np_order, detail::p_lines(f.grid));
    return out;
}

WaveFunction spectral_derivative(const WaveFunction& f, int order) {
    WaveFunction out = f;
    differentiate_lines(out.values.data(), f.axis, f.hbar, order, detail::single_line());
    return out;
}

WaveFunction momentum_power(const WaveFunction& f, int m) {
    if (m == 0) return f;
    WaveFunction out = f;
    // (-i hbar d/dx)^m <-> k^m on the conjugate lattice.
    detail::to_conjugate(out.values.data(), f.axis, f.hbar, -1, detail::single_line());
    for (std::size_t k = 0; k < f.axis.n; ++k) {
        if (m % 2 == 1 && k == 0) out.values[k] = 0.0;
        else out.values[k] *= std::pow(f.axis.conj_point(k, f.hbar), m);
    }
    detail::from_conjugate(out.values.data(), f.axis, f.hbar, -1, detail::single_line());
    return out;
}

cplx integrate(const PhaseField& f) {
    cplx s = 0.0;
    for (auto v : f.values) s += v;
    return s * f.grid.dx() * f.grid.dp();
}

cplx l2_inner(const PhaseField& f, const PhaseField& g) {
    require_same_grid(f, g, "l2_inner");
    cplx s = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) s += std::conj(f.values[i]) * g.values[i];
    return s * f.grid.dx() * f.grid.dp();
}

double l2_norm(const PhaseField& f) {
    double s = 0.0;
    for (auto v : f.values) s += std::norm(v);
    return std::sqrt(s * f.grid.dx() * f.grid.dp());
}

double sup_norm(const PhaseField& f) {
    double m = 0.0;
    for (auto v : f.values) m = std::max(m, std::abs(v));
    return m;
}

namespace {

double frame_fraction(const std::vector<cplx>& v, std::size_t nx, std::size_t np) {
    std::size_t wx = std::max<std::size_t>(2, nx / 16);
    std::size_t wp = std::max<std::size_t>(2, np / 16);
    double total = 0.0, frame = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
        bool edge_x = i < wx || i >= nx - wx;
        for (std::size_t j = 0; j < np; ++j) {
            double a = std::norm(v[i * np + j]);
            total += a;
            if (edge_x || j < wp || j >= np - wp) frame += a;
        }
    }
    return total > 0.0 ? frame / total : 0.0;
}

} // namespace

double tail_mass(const PhaseField& f) {
    double direct = frame_fraction(f.values, f.grid.nx(), f.grid.np());
    double spectral = frame_fraction(fourier_full(f).values, f.grid.nx(), f.grid.np());
    return std::max(direct, spectral);
}

} // namespace psq
