#pragma once

#include "psq/gridcore.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace psq::testing {

inline constexpr double pi = std::numbers::pi;

// Sum of `terms` complex-weighted Gaussians with widths in [w_lo, w_hi]
// (in units of sqrt(hbar)) and centers within +-c (same units).
inline PhaseField random_gaussian_mixture(const PhaseGrid& g, std::mt19937_64& rng, int terms = 3,
                                          double w_lo = 0.8, double w_hi = 1.1, double c = 1.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> w(w_lo, w_hi);
    double s = std::sqrt(g.hbar);
    PhaseField f(g);
    for (int t = 0; t < terms; ++t) {
        cplx coef(u(rng), u(rng));
        double a = c * s * u(rng), b = c * s * u(rng);
        double sx = w(rng) * s, sp = w(rng) * s;
        for (std::size_t i = 0; i < g.nx(); ++i)
            for (std::size_t j = 0; j < g.np(); ++j) {
                double x = g.x.point(i) - a, p = g.p.point(j) - b;
                f(i, j) += coef * std::exp(-x * x / (2 * sx * sx) - p * p / (2 * sp * sp));
            }
    }
    return f;
}

inline double rel_l2(const PhaseField& a, const PhaseField& b) {
    return l2_norm(a - b) / l2_norm(b);
}

inline double max_abs_diff(const PhaseField& a, const PhaseField& b) {
    return sup_norm(a - b);
}

// Normalized harmonic oscillator eigenfunction (omega = 1) by recurrence.
inline WaveFunction hermite_function(const Axis& axis, double hbar, int n) {
    return WaveFunction::sample(axis, hbar, [&](double x) -> cplx {
        double y = x / std::sqrt(hbar);
        double h0 = std::pow(pi * hbar, -0.25) * std::exp(-y * y / 2);
        if (n == 0) return h0;
        double h1 = std::sqrt(2.0) * y * h0;
        for (int k = 1; k < n; ++k) {
            double h2 = std::sqrt(2.0 / (k + 1)) * y * h1 - std::sqrt(double(k) / (k + 1)) * h0;
            h0 = h1;
            h1 = h2;
        }
        return h1;
    });
}

// Oscillator ground distribution for sigma-ordering with Gaussian smoother
// (alpha, beta), closed form in (x, p).
inline cplx ho_ground_closed_form(double x, double p, double hbar, double omega, double sigma, double alpha,
                                  double beta) {
    double sb = 1.0 - sigma;
    double den = sb * sb + sigma * sigma + 2 * alpha * beta + omega * alpha + beta / omega;
    double num = std::sqrt((1 - 2 * sigma) * (1 - 2 * sigma) + (1 + 2 * omega * alpha) * (1 + 2 * beta / omega));
    cplx expo = (-(1 + 2 * beta / omega) * omega * omega * x * x - (1 + 2 * omega * alpha) * p * p -
                 cplx(0.0, 2.0 * (1 - 2 * sigma) * omega) * x * p) /
                (2 * hbar * omega * den);
    return num / (std::sqrt(2 * pi * hbar) * den) * std::exp(expo);
}

// Flat-top window: 1 within 1e-13 for |x|, |p| <= half - 4, below 1e-16 at
// half + 4.5, with spectral content e^{-k^2 edge^2/4} (default edge).
inline double flat_window(double x, double p, double half, double edge = 0.75) {
    auto w = [&](double u) { return 0.5 * (std::erf((u + half) / edge) - std::erf((u - half) / edge)); };
    return w(x) * w(p);
}

// Max |a - b| over points with |x|, |p| <= r.
inline double interior_max_diff(const PhaseField& a, const PhaseField& b, double r) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.grid.nx(); ++i)
        for (std::size_t j = 0; j < a.grid.np(); ++j)
            if (std::abs(a.grid.x.point(i)) <= r && std::abs(a.grid.p.point(j)) <= r)
                m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

} // namespace psq::testing
