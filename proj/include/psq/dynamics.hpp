#pragma once

#include "psq/gridcore.hpp"
#include "psq/ordering.hpp"
#include "psq/wigner.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace psq {

enum class EvolutionMethod {
    split_step_schrodinger,  // Strang splitting, H = T(p) + V(x) only
    matrix_exponential,      // exact propagator of the ordered matrix
    phase_space_rk4,         // method of lines on the Bopp commutator
    star_exponential,        // U(dt) * rho * U(-dt) with a K-term symbol
};

struct NamedObservable {
    std::string name;
    ObservableSpec A;
};

struct EvolutionConfig {
    double dt = 1e-3;
    int steps = 1;
    EvolutionMethod method = EvolutionMethod::split_step_schrodinger;
    int order = 12;          // K for star_exponential, at most 20
    int snapshot_every = 0;  // 0: first and last time only
    std::vector<NamedObservable> observables;
    // phase_space_rk4 only: drop the hbar corrections and integrate the
    // Liouville flow of the classical symbol.
    bool classical = false;
    // Schrodinger path: re-tensor phi(t) into phase space on this grid
    // (default: square grid over the axis). Unset tensor_snapshots to skip.
    bool tensor_snapshots = true;
    std::optional<PhaseGrid> snapshot_grid;
};

struct EvolutionResult {
    std::vector<double> times;
    std::vector<QuasiDistribution> snapshots;
    std::vector<WaveFunction> wavefunctions;  // Schrodinger path only
    std::vector<std::map<std::string, cplx>> expectations;
    // ||phi|| on the Schrodinger path, H norm ||S^{-1} Psi|| in phase space.
    std::vector<double> norms;
    // integral of rho (phase space) or ||phi||^2.
    std::vector<double> masses;
    double stability_bound = 0.0;  // largest admissible dt for phase_space_rk4
};

void validate_config(const EvolutionConfig& cfg);

EvolutionResult evolve_schrodinger(const WaveFunction& phi0, const ObservableSpec& H, const OrderingSpec& spec,
                                   const EvolutionConfig& cfg);

EvolutionResult evolve_phase_space(const QuasiDistribution& rho0, const ObservableSpec& H, const EvolutionConfig& cfg);

// Largest dt accepted by phase_space_rk4 for H on this grid:
// 0.5 / max rate, where each Bopp term of derivative order (r, s) contributes
// hbar^{r+s-1} |c_rs| max|d_x^r d_p^s H| / (dx^s dp^r).
double rk4_stability_bound(const ObservableSpec& H, const OrderingSpec& spec, const PhaseGrid& grid,
                           bool classical = false);

// Truncated symbol sum_{k<=K} (1/k!) (-i t/hbar)^k H^{*k} for sigma-ordering
// (identity smoother), with hbar kept formal.
PolyH star_exponential_symbol(const PolyH& H, double t, int K, double sigma);

// U(t) = S(sum (1/k!)(-i t/hbar)^k (S^{-1}H)^{*k}) sampled on the grid. The
// last term must stay below 1e-8 of the sum in L2 on the grid, else
// NumericalPrecondition. Polynomial H only.
PhaseField star_exponential(const ObservableSpec& H, double t, int K, const OrderingSpec& spec, const PhaseGrid& grid);

// Heisenberg observable A(t) = sum_{k<=K} t^k/k! ad^k A with ad B = [[B, H]],
// the ordered bracket. Same tail rule as star_exponential.
PolyH heisenberg_observable(const PolyH& A, const PolyH& H, double t, int K, const OrderingSpec& spec,
                            const PhaseGrid& grid);

struct HeisenbergTrajectory {
    std::vector<double> times;
    std::vector<cplx> values;          // <A> at every step
    std::vector<cplx> bracket_values;  // <[[A, H]]> at every step
    // max over interior steps of |central difference of <A> - <[[A, H]]>|
    double max_residual = 0.0;
};

// Expectation time series by Schrodinger-picture evolution; the bracket check
// needs polynomial A and H.
HeisenbergTrajectory heisenberg_trajectory(const ObservableSpec& A, const QuasiDistribution& state0,
                                           const ObservableSpec& H, const EvolutionConfig& cfg);
HeisenbergTrajectory heisenberg_trajectory(const ObservableSpec& A, const WaveFunction& state0,
                                           const ObservableSpec& H, const OrderingSpec& spec,
                                           const EvolutionConfig& cfg);

} // namespace psq
