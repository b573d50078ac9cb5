#pragma once

#include "psq/gridcore.hpp"
#include "psq/ordering.hpp"
#include "psq/wigner.hpp"

#include <string>
#include <utility>
#include <vector>

namespace psq {

// Mean value: integral of A *_{sigma,S} rho over the grid.
cplx expectation(const ObservableSpec& A, const QuasiDistribution& state);
cplx expectation(const ObservableSpec& A, const MixedState& state);

enum class Quadrature { x, p };

// sqrt(<A^2> - <A>^2) for A = x or p.
double uncertainty(const QuasiDistribution& state, Quadrature which);
double uncertainty(const MixedState& state, Quadrature which);

struct StargenResidual {
    double left = 0.0;   // ||H * Psi - E Psi|| / ||Psi||
    double right = 0.0;  // ||Psi * H - E Psi|| / ||Psi||
};

StargenResidual stargen_residual(const ObservableSpec& H, const QuasiDistribution& psi, double E);
// Left residual against E_left, right residual against E_right.
StargenResidual stargen_residual(const ObservableSpec& H, const QuasiDistribution& psi, double E_left,
                                 double E_right);

// Dense matrix of the (sigma, S)-ordered operator on an x axis: potentials act
// pointwise, momentum powers spectrally. Polynomial parts are rewritten in
// symmetric (Weyl) form, so a real symmetric symbol gives an exactly
// Hermitian matrix.
class OrderedOperator {
public:
    OrderedOperator(const ObservableSpec& A, const OrderingSpec& spec, const Axis& axis, double hbar);

    std::size_t size() const { return n_; }
    const Axis& axis() const { return axis_; }
    double hbar() const { return hbar_; }
    const std::vector<cplx>& matrix() const { return m_; }  // row-major
    cplx operator()(std::size_t i, std::size_t j) const { return m_[i * n_ + j]; }

    WaveFunction apply(const WaveFunction& psi) const;
    WaveFunction apply_adjoint(const WaveFunction& psi) const;
    // ||M - M^dagger||_F / ||M||_F
    double hermiticity_defect() const;
    // Symmetric-form monomials whose coefficient is not real.
    const std::vector<std::string>& non_hermitian_terms() const { return bad_terms_; }

private:
    Axis axis_;
    double hbar_;
    std::size_t n_;
    std::vector<cplx> m_;
    std::vector<std::string> bad_terms_;
};

struct SpectrumOptions {
    // Largest tolerated relative amplitude of an eigenfunction in its boundary
    // frame or outer spectral frame.
    double resolution_tolerance = 1e-7;
    double hermiticity_tolerance = 1e-10;
    double degeneracy_window = 1e-9;
    // Build phase-space eigenfields on the square grid over the axis and
    // store the star-genvalue residuals.
    bool compute_residuals = false;
};

struct SpectralResult {
    std::vector<double> energies;
    std::vector<WaveFunction> wavefunctions;
    OrderingSpec ordering;
    std::vector<StargenResidual> residuals;  // empty unless requested
};

SpectralResult spectrum_via_schrodinger(const ObservableSpec& H, const OrderingSpec& spec, int n_levels,
                                        const Axis& axis, double hbar, const SpectrumOptions& opts = {});

// Phase-space genfield Psi_mn = phi_m^* (x) phi_n for two levels of a result.
QuasiDistribution eigenfield(const SpectralResult& r, int m, int n);

struct GaugeSpectrumReport {
    std::vector<OrderingSpec> orderings;
    std::vector<std::vector<double>> spectra;
    double max_deviation = 0.0;
    bool consistent = false;  // max_deviation <= 1e-7
};

// Spectra of H for every (sigma, smoother) pair.
GaugeSpectrumReport gauge_spectrum_check(const ObservableSpec& H, const std::vector<double>& sigmas,
                                         const std::vector<Smoother>& smoothers, int n_levels, const Axis& axis,
                                         double hbar, const SpectrumOptions& opts = {});

} // namespace psq
