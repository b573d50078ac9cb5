#pragma once

// Internal: hbar-scaled single-axis transforms between an axis and its
// centered conjugate lattice, backed by FFTW batched plans.

#include "psq/gridcore.hpp"

namespace psq::detail {

// Layout of `count` 1D lines: element t of line b sits at data[b*dist + t*stride].
struct Lines {
    std::size_t count;
    std::size_t stride;
    std::size_t dist;
};

inline Lines x_lines(const PhaseGrid& g) { return {g.np(), g.np(), 1}; }
inline Lines p_lines(const PhaseGrid& g) { return {g.nx(), 1, g.np()}; }
inline Lines single_line() { return {1, 1, 0}; }

// G_k = (d/sqrt(2 pi hbar)) sum_i f_i e^{s i k_k u_i / hbar}, s = +-1.
void to_conjugate(cplx* data, const Axis& axis, double hbar, int s, Lines lines);
// Exact inverse of to_conjugate (kernel sign -s, prefactor dk/sqrt(2 pi hbar)).
void from_conjugate(cplx* data, const Axis& axis, double hbar, int s, Lines lines);

// Raw unnormalized DFT along lines, sign = FFTW sign (-1 or +1).
void raw_dft(cplx* data, std::size_t n, int sign, Lines lines);

} // namespace psq::detail
