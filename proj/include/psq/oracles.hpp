#pragma once

#include "psq/gridcore.hpp"
#include "psq/ordering.hpp"
#include "psq/wigner.hpp"

#include <functional>
#include <vector>

namespace psq {

struct OscillatorParams {
    double omega = 1.0;
    double sigma = 0.5;
    double alpha = 0.0;
    double beta = 0.0;

    double lambda() const { return 0.5 * (1.0 + omega * alpha + beta / omega); }
    double lambda_bar() const { return 1.0 - lambda(); }
    OrderingSpec spec() const;
    // (n + lambda_bar) hbar omega
    double energy(int n, double hbar) const { return (n + lambda_bar()) * hbar * omega; }
};

struct FreeGaussianParams {
    double p0 = 0.0;
    double delta_p = 1.0;
    double sigma = 0.5;

    double delta_x(double hbar) const { return hbar / (2.0 * delta_p); }
};

struct CoherentParams {
    double x_bar = 0.0;
    double p_bar = 0.0;
    double omega = 1.0;
    double sigma = 0.5;
};

// Annihilation and creation symbols (omega x +- i p) / sqrt(2 hbar omega),
// with hbar kept numeric.
PolyH annihilation_symbol(double omega, double hbar);
PolyH creation_symbol(double omega, double hbar);
// (p^2 + omega^2 x^2) / 2
PolyH oscillator_hamiltonian(double omega);

// Free Gaussian packet evolved to time t (identity smoother). The grid must
// reach five widths on each side of the packet center in x and in p.
QuasiDistribution free_gaussian(const FreeGaussianParams& params, double t, const PhaseGrid& grid);
// The packet phi(x, t) in configuration space.
WaveFunction free_gaussian_wave(const FreeGaussianParams& params, double t, const Axis& axis, double hbar);

// Oscillator ground state for any (sigma, alpha, beta), Gaussian smoother.
QuasiDistribution ho_ground(const OscillatorParams& params, const PhaseGrid& grid);
// Integral of the printed ground-state expression divided by sqrt(2 pi hbar);
// 1 when the prefactor is the normalized one.
double ho_ground_measured_normalization(const OscillatorParams& params, const PhaseGrid& grid);

// Laguerre closed form; needs sigma = 1/2, beta = omega^2 alpha, lambda not
// 0 or 1, and m, n <= 12.
QuasiDistribution ho_state(int m, int n, const OscillatorParams& params, const PhaseGrid& grid);
// abar^{*m} * Psi_00 * a^{*n} / sqrt(m! n!) through Bopp shifts; same
// constraints as ho_state plus m + n <= 8.
QuasiDistribution ho_ladder(int m, int n, const OscillatorParams& params, const PhaseGrid& grid);

struct CoherentResult {
    QuasiDistribution state;
    double left_residual = 0.0;   // ||a * Psi - z Psi|| / ||Psi||
    double right_residual = 0.0;  // ||Psi * abar - z^* Psi|| / ||Psi||
};

CoherentResult coherent_state(const CoherentParams& params, const PhaseGrid& grid);

// Closed-form classical orbit of the oscillator center.
double coherent_center_x(const CoherentParams& params, double t);
double coherent_center_p(const CoherentParams& params, double t);

// Free Gaussian in the Gaussian-smoothed plane-wave limit (beta > 0). It is
// not a proper state: the result has normalized = false.
QuasiDistribution smoothed_plane_wave(double p0, double beta, const PhaseGrid& grid);

// <rho_hbar, testfn> for each hbar.
std::vector<cplx> classical_limit_probe(const std::function<QuasiDistribution(double)>& family,
                                        const std::function<double(double, double)>& testfn,
                                        const std::vector<double>& hbars);

} // namespace psq
