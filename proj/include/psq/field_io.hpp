#pragma once

#include "psq/gridcore.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace psq {

inline constexpr std::uint32_t field_format_version = 1;

// Binary container "PSQF": 32-byte header (magic, version, nx, np, zero
// padding), six little-endian f64 (x_min, x_max, p_min, p_max, hbar, 0),
// then nx*np interleaved (re, im) f64 pairs in x-major order.
void write_field(std::ostream& out, const PhaseField& f);
PhaseField read_field(std::istream& in);
void save_field(const std::string& path, const PhaseField& f);
PhaseField load_field(const std::string& path);

// CSV: "# hbar=... nx=... np=..." comment, header "x,p,re,im", one row per
// sample, 17 significant digits.
void write_field_csv(std::ostream& out, const PhaseField& f);

// Shortest-exact decimal with 17 significant digits, used by every CSV writer.
std::string format_real(double v);

} // namespace psq
