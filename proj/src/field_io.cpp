#include "psq/field_io.hpp"

#include "psq/error.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>

namespace psq {

static_assert(std::endian::native == std::endian::little,
              "field serialization assumes a little-endian host");

namespace {

constexpr std::array<char, 4> magic{'P', 'S', 'Q', 'F'};

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw InvalidArgument("field file truncated");
    return v;
}

} // namespace

void write_field(std::ostream& out, const PhaseField& f) {
    out.write(magic.data(), 4);
    put<std::uint32_t>(out, field_format_version);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid.nx()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid.np()));
    std::array<char, 16> pad{};
    out.write(pad.data(), pad.size());
    for (double v : {f.grid.x.lo, f.grid.x.hi, f.grid.p.lo, f.grid.p.hi, f.grid.hbar, 0.0}) put(out, v);
    for (cplx v : f.values) {
        put(out, v.real());
        put(out, v.imag());
    }
}

PhaseField read_field(std::istream& in) {
    std::array<char, 4> m{};
    in.read(m.data(), 4);
    if (!in || m != magic) throw InvalidArgument("not a PSQF field file");
    auto version = get<std::uint32_t>(in);
    if (version != field_format_version) throw InvalidArgument("unsupported PSQF version");
    auto nx = get<std::uint32_t>(in);
    auto np = get<std::uint32_t>(in);
    std::array<char, 16> pad{};
    in.read(pad.data(), pad.size());
    std::array<double, 6> h{};
    for (auto& v : h) v = get<double>(in);
    PhaseGrid g = make_grid(nx, np, h[0], h[1], h[2], h[3], h[4]);
    PhaseField f(g);
    for (auto& v : f.values) {
        double re = get<double>(in);
        double im = get<double>(in);
        v = cplx(re, im);
    }
    return f;
}

void save_field(const std::string& path, const PhaseField& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_field(out, f);
    if (!out) throw IoError("write failed: " + path);
}

PhaseField load_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_field(in);
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_field_csv(std::ostream& out, const PhaseField& f) {
    out << "# hbar=" << format_real(f.grid.hbar) << " nx=" << f.grid.nx() << " np=" << f.grid.np() << '\n';
    out << "x,p,re,im\n";
    for (std::size_t i = 0; i < f.grid.nx(); ++i)
        for (std::size_t j = 0; j < f.grid.np(); ++j) {
            cplx v = f(i, j);
            out << format_real(f.grid.x.point(i)) << ',' << format_real(f.grid.p.point(j)) << ','
                << format_real(v.real()) << ',' << format_real(v.imag()) << '\n';
        }
}

} // namespace psq
