#pragma once

#include "psq/gridcore.hpp"
#include "psq/ordering.hpp"

namespace psq {

struct StarOptions {
    double tail_threshold = 1e-10;  // tail_mass above this flags the result
    bool zero_pad = false;          // evaluate on a 2x zero-padded grid, then crop
};

struct StarReport {
    double tail_f = 0.0;
    double tail_g = 0.0;
    bool tail_warning = false;
};

struct SmootherOptions {
    double max_amplification = 1e6;   // hard spectral cutoff for S^{-1}
    double discard_tolerance = 1e-12; // relative norm allowed beyond the cutoff
};

enum class Side { left, right };

// f *_sigma g via the twisted convolution on the conjugate lattice:
//   F(f*g)(xi,eta) = (1/2 pi hbar) sum Ff(xi',eta') Fg(xi-xi',eta-eta')
//                    exp[(i/hbar)(sigma xi'(eta-eta') - sigma_bar (xi-xi') eta')] dxi' deta'
// Partners falling off the lattice are dropped. Cost O((nx np)^2).
PhaseField star_sigma(const PhaseField& f, const PhaseField& g, double sigma,
                      const StarOptions& opts = {}, StarReport* report = nullptr);

// S(S^{-1} f *_sigma S^{-1} g); identical to star_sigma for the identity smoother.
PhaseField star_sigma_S(const PhaseField& f, const PhaseField& g, const OrderingSpec& spec,
                        const StarOptions& opts = {}, StarReport* report = nullptr);

// A *_{sigma,S} Psi (left) or Psi *_{sigma,S} A (right) through Bopp shifts.
PhaseField bopp_apply(const ObservableSpec& A, const PhaseField& psi, Side side, const OrderingSpec& spec);

// S^{-1} A term by term. Function terms are kept only where the smoother
// leaves their variable alone; otherwise Unsupported.
ObservableSpec pull_back_observable(const ObservableSpec& A, const OrderingSpec& spec);

PhaseField apply_smoother(const OrderingSpec& spec, const PhaseField& f, Direction dir,
                          const SmootherOptions& opts = {});

// exp(i hbar (sigma_to - sigma_from) d_x d_p) f.
PhaseField gauge_transform(const PhaseField& f, double sigma_from, double sigma_to);

PhaseField star_commutator(const PhaseField& f, const PhaseField& g, const OrderingSpec& spec);
PhaseField moyal_bracket(const PhaseField& f, const PhaseField& g, const OrderingSpec& spec);
// d_x f d_p g - d_p f d_x g with spectral derivatives.
PhaseField poisson_bracket(const PhaseField& f, const PhaseField& g);

// A^dagger = S S_{sigma - sigma_bar} S-bar^{-1} A*.
PhaseField involution_dagger(const PhaseField& A, const OrderingSpec& spec);

// Polynomial sampled on the grid with hbar from the grid.
PhaseField sample_polynomial(const PolyH& A, const PhaseGrid& g);

// A sampled on the grid (function terms evaluated at (x, p), hbar from the grid).
PhaseField sample_observable(const ObservableSpec& A, const PhaseGrid& g);

} // namespace psq
