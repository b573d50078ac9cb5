#include <doctest.h>

#include "helpers.hpp"
#include "psq/error.hpp"
#include "psq/field_io.hpp"

#include <sstream>

using namespace psq;
using namespace psq::testing;

TEST_CASE("make_grid spacings and validation") {
    PhaseGrid g = make_grid(64, 64, -8, 8, -8, 8, 1.0);
    CHECK(g.dx() == 0.25);
    CHECK(g.dp() == 0.25);
    CHECK(g.dxi() == doctest::Approx(2 * pi / 16).epsilon(1e-15));
    CHECK(g.deta() == doctest::Approx(2 * pi / 16).epsilon(1e-15));
    CHECK(g.xi(32) == 0.0);
    CHECK_THROWS_WITH_AS(make_grid(64, 64, -8, 8, -8, 8, 0.0), "hbar must be positive", InvalidArgument);
    CHECK_THROWS_WITH_AS(make_grid(60, 64, -8, 8, -8, 8, 1.0), "size not a power of two", InvalidArgument);
    CHECK_THROWS_AS(make_grid(64, 64, 8, 8, -8, 8, 1.0), InvalidArgument);
}

TEST_CASE("Gaussian is self-dual under the full transform") {
    for (double hbar : {1.0, 0.25}) {
        double s = 8 * std::sqrt(hbar);
        PhaseGrid g = make_grid(64, 64, -s, s, -s, s, hbar);
        auto f = PhaseField::sample(g, [&](double x, double p) { return std::exp(-(x * x + p * p) / (2 * hbar)); });
        SpectralField F = fourier_full(f);
        double err = 0.0;
        for (std::size_t k = 0; k < g.nx(); ++k)
            for (std::size_t l = 0; l < g.np(); ++l) {
                double xi = g.xi(k), eta = g.eta(l);
                err = std::max(err, std::abs(F(k, l) - std::exp(-(xi * xi + eta * eta) / (2 * hbar))));
            }
        CHECK(err < 1e-10);
    }
}

TEST_CASE("shifted Gaussian picks up the kernel phase with the fixed signs") {
    // f = e^{-((x-a)^2 + (p-b)^2)/2} -> Ff = e^{-(xi^2+eta^2)/2} e^{-i(xi a - eta b)}.
    PhaseGrid g = make_grid(64, 64, -8, 8, -6, 10, 1.0);
    double a = 0.7, b = 1.9;
    auto f = PhaseField::sample(g, [&](double x, double p) {
        return std::exp(-((x - a) * (x - a) + (p - b) * (p - b)) / 2);
    });
    SpectralField F = fourier_full(f);
    double err = 0.0;
    for (std::size_t k = 0; k < g.nx(); ++k)
        for (std::size_t l = 0; l < g.np(); ++l) {
            double xi = g.xi(k), eta = g.eta(l);
            cplx expect = std::exp(-(xi * xi + eta * eta) / 2) * std::polar(1.0, -(xi * a - eta * b));
            err = std::max(err, std::abs(F(k, l) - expect));
        }
    CHECK(err < 1e-10);
}

TEST_CASE("round trips are the identity") {
    std::mt19937_64 rng(11);
    PhaseGrid g = make_grid(64, 32, -8, 8, -7, 9, 0.7);
    auto f = random_gaussian_mixture(g, rng, 4);
    CHECK(rel_l2(inverse_fourier_full(fourier_full(f)), f) < 1e-12);
    for (auto ax : {FourierAxis::x, FourierAxis::p}) {
        auto there = fourier_partial(f, ax, Direction::forward);
        CHECK(rel_l2(fourier_partial(there, ax, Direction::inverse), f) < 1e-12);
        auto back = fourier_partial(f, ax, Direction::inverse);
        CHECK(rel_l2(fourier_partial(back, ax, Direction::forward), f) < 1e-12);
    }
}

TEST_CASE("partial transforms compose to the full transform") {
    std::mt19937_64 rng(12);
    PhaseGrid g = make_square_grid(64, 8, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        auto f = random_gaussian_mixture(g, rng, 3);
        auto composed = fourier_partial(fourier_partial(f, FourierAxis::p, Direction::inverse),
                                        FourierAxis::x, Direction::forward);
        PhaseField full(g, fourier_full(f).values);
        CHECK(rel_l2(composed, full) < 1e-12);
    }
}

TEST_CASE("F2 maps a Gaussian in the y slot to a Gaussian in p") {
    // (1/sqrt(2 pi hbar)) \int e^{-y^2/2hbar} e^{-iyp/hbar} dy = e^{-p^2/2hbar}.
    double hbar = 0.5;
    PhaseGrid g = make_square_grid(64, 8 * std::sqrt(hbar), hbar);
    PhaseField h(g);
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t l = 0; l < g.np(); ++l) {
            double y = g.eta(l);
            h(i, l) = std::exp(-g.x.point(i) * g.x.point(i)) * std::exp(-y * y / (2 * hbar));
        }
    auto out = fourier_partial(h, FourierAxis::p, Direction::forward);
    auto expect = PhaseField::sample(g, [&](double x, double p) { return std::exp(-x * x) * std::exp(-p * p / (2 * hbar)); });
    CHECK(max_abs_diff(out, expect) < 1e-12);
}

TEST_CASE("discrete Parseval constant") {
    // Fix the constant on an analytic Gaussian, then check it on random fields.
    PhaseGrid g = make_square_grid(64, 8, 1.0);
    auto spectral_norm2 = [&](const PhaseField& f) {
        double s = 0;
        for (auto v : fourier_full(f).values) s += std::norm(v);
        return s * g.dxi() * g.deta();
    };
    auto gauss = PhaseField::sample(g, [](double x, double p) { return std::exp(-(x * x + p * p) / 2); });
    double c = spectral_norm2(gauss) / std::pow(l2_norm(gauss), 2);
    CHECK(c == doctest::Approx(1.0).epsilon(1e-12));
    std::mt19937_64 rng(3);
    for (int t = 0; t < 5; ++t) {
        auto f = random_gaussian_mixture(g, rng, 3);
        CHECK(spectral_norm2(f) / std::pow(l2_norm(f), 2) == doctest::Approx(c).epsilon(1e-12));
    }
}

TEST_CASE("derivative rule of the full transform") {
    std::mt19937_64 rng(5);
    PhaseGrid g = make_square_grid(64, 8, 1.0);
    auto f = random_gaussian_mixture(g, rng, 2);
    SpectralField F = fourier_full(f);
    for (int n = 0; n <= 2; ++n)
        for (int m = 0; m <= 2; ++m) {
            SpectralField D = fourier_full(spectral_derivative(f, n, m));
            double err = 0, scale = 0;
            for (std::size_t k = 1; k < g.nx(); ++k)
                for (std::size_t l = 1; l < g.np(); ++l) {
                    cplx mult = std::pow(cplx(0, g.xi(k)), n) * std::pow(cplx(0, -g.eta(l)), m);
                    err = std::max(err, std::abs(D(k, l) - mult * F(k, l)));
                    scale = std::max(scale, std::abs(D(k, l)));
                }
            CHECK(err < 1e-10 * std::max(1.0, scale));
        }
}

TEST_CASE("quadrature and inner products") {
    // \iint e^{-(x-a)^2/2s^2} e^{-(p-b)^2/2t^2} = 2 pi s t.
    PhaseGrid g = make_square_grid(64, 10, 1.0);
    double s = 0.9, t = 1.3;
    auto f = PhaseField::sample(g, [&](double x, double p) {
        return std::exp(-(x - 0.4) * (x - 0.4) / (2 * s * s) - (p + 0.3) * (p + 0.3) / (2 * t * t));
    });
    CHECK(std::abs(integrate(f) - 2 * pi * s * t) < 1e-8 * 2 * pi * s * t);
    std::mt19937_64 rng(8);
    auto h = random_gaussian_mixture(g, rng, 3);
    cplx self = l2_inner(h, h);
    CHECK(self.real() >= 0);
    CHECK(std::abs(self.imag()) < 1e-14 * self.real());
    CHECK(self.real() == doctest::Approx(l2_norm(h) * l2_norm(h)).epsilon(1e-13));
    cplx ab = l2_inner(f, h), ba = l2_inner(h, f);
    CHECK(std::abs(ab - std::conj(ba)) < 1e-13);
}

TEST_CASE("mismatched grids are rejected") {
    PhaseField a(make_square_grid(32, 8, 1.0)), b(make_square_grid(32, 8, 0.5));
    CHECK_THROWS_AS(l2_inner(a, b), GridMismatch);
    CHECK_THROWS_AS(a + b, GridMismatch);
}

TEST_CASE("binary and CSV serialization") {
    std::mt19937_64 rng(1);
    PhaseGrid g = make_grid(16, 8, -3, 5, -2, 2, 0.3);
    auto f = random_gaussian_mixture(g, rng, 2);
    std::stringstream buf;
    write_field(buf, f);
    std::string bytes = buf.str();
    CHECK(bytes.size() == 32 + 48 + 16 * g.size());
    CHECK(bytes.substr(0, 4) == "PSQF");
    auto back = read_field(buf);
    CHECK(back.grid == f.grid);
    CHECK(back.values == f.values);

    std::stringstream csv;
    write_field_csv(csv, f);
    std::string first;
    std::getline(csv, first);
    CHECK(first == "# hbar=0.29999999999999999 nx=16 np=8");
    std::getline(csv, first);
    CHECK(first == "x,p,re,im");

    std::stringstream junk("PSQX........");
    CHECK_THROWS_AS(read_field(junk), InvalidArgument);
}
