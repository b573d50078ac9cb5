#pragma once

#include "psq/gridcore.hpp"
#include "psq/ordering.hpp"
#include "psq/starnum.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace psq {

struct QuasiDistribution {
    PhaseField psi_field;
    OrderingSpec spec;
    bool normalized = false;  // flagged as a state: integral / sqrt(2 pi hbar) = 1
    std::optional<std::pair<WaveFunction, WaveFunction>> source;

    // rho = psi_field / sqrt(2 pi hbar)
    PhaseField rho() const;
};

struct MixedComponent {
    double weight = 0.0;
    QuasiDistribution state;
};

class MixedState {
public:
    // Weights must lie in [0, 1] and sum to 1 within 1e-12; all components
    // share one grid and one ordering.
    explicit MixedState(std::vector<MixedComponent> components);

    const std::vector<MixedComponent>& components() const { return components_; }
    QuasiDistribution combined() const;

private:
    std::vector<MixedComponent> components_;
};

struct TensorOptions {
    // Largest tolerated relative amplitude of either wavefunction in its
    // boundary frame or in the outer frame of its spectrum.
    double interpolation_tolerance = 1e-8;
};

// phi^* (x)_{sigma,S} psi, on the grid whose x axis is the wavefunctions' axis
// and whose p axis is given: S (1/sqrt(2 pi hbar)) int dy e^{-ipy/hbar}
// phi^*(x - sigma_bar y) psi(x + sigma y). The y integral runs over the
// conjugate lattice of the p axis; samples are shifted spectrally.
QuasiDistribution twisted_tensor(const WaveFunction& phi, const WaveFunction& psi, const OrderingSpec& spec,
                                 const PhaseGrid& grid, const TensorOptions& opts = {});
// Square grid built from the wavefunction axis (p span equal to x span).
QuasiDistribution twisted_tensor(const WaveFunction& phi, const WaveFunction& psi, const OrderingSpec& spec,
                                 const TensorOptions& opts = {});

// <Psi1|Psi2>_H = <S^{-1} Psi1 | S^{-1} Psi2>_{L^2}
cplx h_inner(const PhaseField& a, const PhaseField& b, const OrderingSpec& spec);
double h_norm(const PhaseField& a, const OrderingSpec& spec);

enum class MarginalAxis { x, p };

// (1/sqrt(2 pi hbar)) int S^{-1} Psi dp (or dx), real part.
std::vector<double> marginal(const QuasiDistribution& state, MarginalAxis axis, const SmootherOptions& opts = {});

// Residuals in the H norm.
struct PurityReport {
    bool is_pure = false;
    double hermiticity = 0.0;    // ||Psi - Psi^dagger||
    double idempotence = 0.0;    // ||Psi * Psi - Psi / sqrt(2 pi hbar)||
    double normalization = 0.0;  // | ||Psi|| - 1 |
};

inline constexpr double purity_tolerance = 1e-5;

PurityReport purity_check(const QuasiDistribution& state);

// Normalized oscillator eigenfunction (mass 1, frequency omega) by the
// three-term recurrence.
WaveFunction hermite_basis_function(const Axis& axis, double hbar, int n, double omega = 1.0);

// || Psi_ij * Psi_kl - delta_il Psi_kj / sqrt(2 pi hbar) || (field L2 norm) with
// Psi_ij = phi_i^* (x) phi_j in the Hermite basis.
double basis_idempotence_check(int i, int j, int k, int l, const OrderingSpec& spec, const PhaseGrid& grid);

// Field plus JSON sidecar at `field_path` + ".json":
// {"sigma", "smoother": {"kind", "alpha", "beta"}, "normalized"}.
void save_quasi(const std::string& field_path, const QuasiDistribution& q);
QuasiDistribution load_quasi(const std::string& field_path);
std::string quasi_sidecar(const QuasiDistribution& q);

} // namespace psq
