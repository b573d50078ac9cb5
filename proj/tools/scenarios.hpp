#pragma once

#include "artifacts.hpp"

#include "psq/gridcore.hpp"
#include "psq/ordering.hpp"
#include "psq/wigner.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace psq::cli {

// Everything a scenario needs, with the common blocks already resolved.
struct Context {
    json config;
    json params;  // the "params" block, {} when absent
    PhaseGrid grid;
    OrderingSpec spec;
    double alpha = 0.0;
    double beta = 0.0;
    bool csv = true, bin = true, dat = true;
    std::uint64_t seed = 0;
    Staging* stage = nullptr;
    std::ostream* log = nullptr;

    // Field in every requested format: <stem>.psqf, <stem>.csv, <stem>.dat.
    void emit_field(const std::string& stem, const PhaseField& f) const;
    // emit_field plus the <stem>.psqf.json sidecar, so load_quasi reads
    // <stem>.psqf back.
    void emit_quasi(const std::string& stem, const QuasiDistribution& q) const;
    void emit_text(const std::string& name, const std::string& text) const;
    void emit_json(const std::string& name, const json& j) const;
};

// Builds grid, ordering, formats and seed from a schema-valid config.
Context resolve_context(const json& config);

void run_spectrum(const Context& c);
void run_gauge_check(const Context& c);
void run_evolve(const Context& c);
void run_oracle(const Context& c);
void run_wigner(const Context& c);
void run_starprod(const Context& c);
void run_symbolic(const Context& c);
void run_classical_limit(const Context& c);

// Gnuplot "splot" grid layout: "# x p re im", one block per x separated by
// blank lines.
std::string field_dat(const PhaseField& f);

// Seeded sum of complex-weighted Gaussians with widths and centers scaled by
// sqrt(hbar); `stream` separates independent draws under one seed.
PhaseField random_mixture(const PhaseGrid& g, std::uint64_t seed, unsigned stream, int terms);

} // namespace psq::cli
