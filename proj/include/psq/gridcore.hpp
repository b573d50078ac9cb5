#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace psq {

using cplx = std::complex<double>;

// Uniform periodic axis: n points lo, lo+d, ..., hi-d.
struct Axis {
    std::size_t n = 0;
    double lo = 0.0;
    double hi = 0.0;

    double step() const { return (hi - lo) / static_cast<double>(n); }
    double point(std::size_t i) const { return lo + static_cast<double>(i) * step(); }
    // Conjugate lattice (wavenumber scaled by hbar), centered: index n/2 is zero.
    double conj_step(double hbar) const;
    double conj_point(std::size_t k, double hbar) const {
        return (static_cast<double>(k) - static_cast<double>(n / 2)) * conj_step(hbar);
    }
    bool operator==(const Axis&) const = default;
};

Axis make_axis(std::size_t n, double lo, double hi);

struct PhaseGrid {
    Axis x;
    Axis p;
    double hbar = 1.0;

    std::size_t nx() const { return x.n; }
    std::size_t np() const { return p.n; }
    std::size_t size() const { return x.n * p.n; }
    double dx() const { return x.step(); }
    double dp() const { return p.step(); }
    double dxi() const { return x.conj_step(hbar); }
    double deta() const { return p.conj_step(hbar); }
    double xi(std::size_t k) const { return x.conj_point(k, hbar); }
    double eta(std::size_t l) const { return p.conj_point(l, hbar); }
    std::size_t index(std::size_t i, std::size_t j) const { return i * p.n + j; }
    bool operator==(const PhaseGrid&) const = default;
};

PhaseGrid make_grid(std::size_t nx, std::size_t np, double x_min, double x_max,
                    double p_min, double p_max, double hbar);

// Symmetric square grid [-half, half)^2.
inline PhaseGrid make_square_grid(std::size_t n, double half, double hbar) {
    return make_grid(n, n, -half, half, -half, half, hbar);
}

// Samples on a PhaseGrid, x-major: values[i*np + j] = f(x_i, p_j).
struct PhaseField {
    PhaseGrid grid;
    std::vector<cplx> values;

    PhaseField() = default;
    explicit PhaseField(const PhaseGrid& g, cplx fill = 0.0) : grid(g), values(g.size(), fill) {}
    PhaseField(const PhaseGrid& g, std::vector<cplx> v);

    static PhaseField sample(const PhaseGrid& g, const std::function<cplx(double, double)>& f);

    cplx& operator()(std::size_t i, std::size_t j) { return values[i * grid.p.n + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return values[i * grid.p.n + j]; }

    PhaseField& operator+=(const PhaseField& o);
    PhaseField& operator-=(const PhaseField& o);
    PhaseField& operator*=(cplx s);
    PhaseField conj() const;
    bool all_finite() const;
};

PhaseField operator+(PhaseField a, const PhaseField& b);
PhaseField operator-(PhaseField a, const PhaseField& b);
PhaseField operator*(cplx s, PhaseField a);
PhaseField operator*(PhaseField a, cplx s);
// Pointwise product.
PhaseField hadamard(const PhaseField& a, const PhaseField& b);

// Configuration-space state on an x-axis.
struct WaveFunction {
    Axis axis;
    double hbar = 1.0;
    std::vector<cplx> values;

    WaveFunction() = default;
    WaveFunction(const Axis& a, double h, std::vector<cplx> v);
    static WaveFunction sample(const Axis& a, double h, const std::function<cplx(double)>& f);

    double norm() const;
    cplx inner(const WaveFunction& o) const;  // <this|o>
    WaveFunction& operator+=(const WaveFunction& o);
    WaveFunction& operator*=(cplx s);
};

WaveFunction operator+(WaveFunction a, const WaveFunction& b);
WaveFunction operator-(WaveFunction a, const WaveFunction& b);
WaveFunction operator*(cplx s, WaveFunction a);

// Ff on the conjugate (xi, eta) lattice in centered, increasing order.
struct SpectralField {
    PhaseGrid grid;
    std::vector<cplx> values;
    cplx& operator()(std::size_t k, std::size_t l) { return values[k * grid.p.n + l]; }
    const cplx& operator()(std::size_t k, std::size_t l) const { return values[k * grid.p.n + l]; }
};

void require_same_grid(const PhaseField& a, const PhaseField& b, const char* where);
void require_finite(const PhaseField& f, const char* where);

// Ff(xi,eta) = (1/2 pi hbar) \iint f e^{-i(xi x - eta p)/hbar} dx dp.
SpectralField fourier_full(const PhaseField& f);
PhaseField inverse_fourier_full(const SpectralField& s);

enum class FourierAxis { x, p };
enum class Direction { forward, inverse };

// Single-axis hbar-scaled transforms with prefactor 1/sqrt(2 pi hbar).
//   x, forward : (x, .) -> (xi, .)  kernel e^{-i x xi/hbar}
//   x, inverse : (xi, .) -> (x, .)
//   p, forward : (., y) -> (., p)   kernel e^{-i y p/hbar}   (y on the eta lattice)
//   p, inverse : (., p) -> (., y)
// so that fourier_full = (x, forward) after (p, inverse).
PhaseField fourier_partial(const PhaseField& f, FourierAxis axis, Direction dir);

// Spectral derivative d^n/dx^n d^m/dp^m on the periodic grid.
PhaseField spectral_derivative(const PhaseField& f, int nx_order, int np_order);
// d^n/dx^n of a wavefunction.
WaveFunction spectral_derivative(const WaveFunction& f, int order);
// (-i hbar d/dx)^m applied spectrally, Nyquist mode dropped for odd m.
WaveFunction momentum_power(const WaveFunction& f, int m);

cplx integrate(const PhaseField& f);
cplx l2_inner(const PhaseField& f, const PhaseField& g);  // conjugate-linear in f
double l2_norm(const PhaseField& f);
double sup_norm(const PhaseField& f);

// Fraction of the squared norm lying in the outer frame of the grid (width
// max(2, n/16) cells per side), in direct and conjugate space; the larger.
double tail_mass(const PhaseField& f);

} // namespace psq
