// Acceptance run: one line per criterion, nonzero exit if any fails.

#include "helpers.hpp"
#include "psq/dynamics.hpp"
#include "psq/oracles.hpp"
#include "psq/polystar.hpp"
#include "psq/spectra.hpp"
#include "psq/starnum.hpp"
#include "psq/wigner.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

using namespace psq;
using namespace psq::testing;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;

    // Records a measured value against a bound; the first failure names itself.
    void bound(const std::string& what, double value, double limit) {
        char buf[160];
        bool ok = value < limit;
        std::snprintf(buf, sizeof buf, "%s%s %.3g < %.0e", detail.empty() ? "" : "; ", what.c_str(), value, limit);
        detail += buf;
        if (!ok) {
            pass = false;
            detail += " FAILED";
        }
    }
    void require(const std::string& what, bool ok) {
        detail += (detail.empty() ? "" : "; ") + what + (ok ? " ok" : " FAILED");
        pass = pass && ok;
    }
};

int failures = 0;

void report(int n, const char* title, const std::function<Outcome()>& body) {
    auto t0 = clock_type::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("threw: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d: %s  %s [%s] (%.2f s)\n", n, o.pass ? "PASS" : "FAIL", title, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
}

ObservableSpec osc_H() { return ObservableSpec(oscillator_hamiltonian(1.0)); }
ObservableSpec quartic_H() { return ObservableSpec(parse_polynomial("1/2*p^2 + 1/4*x^4")); }

// Max over pairs of |x_i - y_i|.
double max_gap(const std::vector<double>& a, const std::function<double(std::size_t)>& want) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - want(i)));
    return m;
}

Outcome oscillator_spectrum() {
    Outcome o;
    Axis ax = make_axis(512, -12, 12);
    auto t0 = clock_type::now();
    SpectralResult moyal = spectrum_via_schrodinger(osc_H(), OrderingSpec::moyal(), 5, ax, 1.0);
    double moyal_time = seconds_since(t0);
    double rel = 0.0;
    for (int n = 0; n < 5; ++n) rel = std::max(rel, std::abs(moyal.energies[n] - (n + 0.5)) / (n + 0.5));
    o.bound("Moyal rel err", rel, 1e-8);

    SpectralResult smoothed = spectrum_via_schrodinger(osc_H(), OrderingSpec::gaussian(0.5, 0.1, 0.1), 5, ax, 1.0);
    double rel_s = 0.0;
    for (int n = 0; n < 5; ++n) rel_s = std::max(rel_s, std::abs(smoothed.energies[n] - (n + 0.4)) / (n + 0.4));
    o.bound("smoothed rel err", rel_s, 1e-6);
    o.bound("runtime s", moyal_time, 5.0);
    return o;
}

Outcome gauge_invariance() {
    Outcome o;
    Axis ax = make_axis(256, -10, 10);
    auto t0 = clock_type::now();
    auto osc = gauge_spectrum_check(osc_H(), {0.0, 0.5, 1.0}, {IdentitySmoother{}}, 5, ax, 1.0);
    auto quart = gauge_spectrum_check(quartic_H(), {0.0, 0.5, 1.0}, {IdentitySmoother{}}, 5, ax, 1.0);
    double t = seconds_since(t0);
    o.bound("oscillator spread", osc.max_deviation, 1e-7);
    o.bound("quartic spread", quart.max_deviation, 1e-7);
    o.bound("runtime s", t, 20.0);
    return o;
}

Outcome stationary_states() {
    Outcome o;
    PhaseGrid g = make_square_grid(128, 8, 1.0);
    OscillatorParams q;
    auto t0 = clock_type::now();
    double left = 0.0, right = 0.0;
    for (int n = 0; n <= 4; ++n) {
        auto r = stargen_residual(osc_H(), ho_state(n, n, q, g), q.energy(n, 1.0));
        left = std::max(left, r.left);
        right = std::max(right, r.right);
    }
    double t = seconds_since(t0);
    o.bound("left residual", left, 1e-6);
    o.bound("right residual", right, 1e-6);
    o.bound("runtime s", t, 30.0);
    return o;
}

Outcome ladder_closed_form() {
    Outcome o;
    PhaseGrid g = make_square_grid(128, 10, 1.0);
    // Moyal, and a Gaussian smoother with lambda = 0.6 on the closed-form line.
    for (OscillatorParams q : {OscillatorParams{}, OscillatorParams{1.0, 0.5, 0.1, 0.1}}) {
        double worst = 0.0;
        for (int m = 0; m <= 4; ++m)
            for (int n = 0; m + n <= 4; ++n)
                worst = std::max(worst, rel_l2(ho_ladder(m, n, q, g).psi_field, ho_state(m, n, q, g).psi_field));
        o.bound(q.alpha == 0.0 ? "Moyal rel L2" : "smoothed rel L2", worst, 1e-6);
    }
    return o;
}

Outcome free_particle() {
    Outcome o;
    Axis ax = make_axis(256, -24, 24);
    PhaseGrid g = make_grid(256, 256, -24, 24, -10, 10, 1.0);
    for (double sigma : {0.5, 0.3}) {
        FreeGaussianParams q{1.0, 1.0, sigma};
        EvolutionConfig cfg;
        cfg.dt = 1e-3;
        cfg.steps = 1000;
        cfg.snapshot_every = 250;
        cfg.snapshot_grid = g;
        EvolutionResult r =
            evolve_schrodinger(free_gaussian_wave(q, 0.0, ax, 1.0), ObservableSpec(parse_polynomial("1/2*p^2")),
                               OrderingSpec{sigma}, cfg);
        double state_err = rel_l2(r.snapshots.back().psi_field, free_gaussian(q, r.times.back(), g).psi_field);
        double moment_err = 0.0;
        double dx0 = q.delta_x(1.0);
        for (std::size_t s = 0; s < r.snapshots.size(); ++s) {
            double t = r.times[s];
            const QuasiDistribution& st = r.snapshots[s];
            moment_err = std::max(moment_err, std::abs(expectation(ObservableSpec(PolyH::x()), st) - q.p0 * t));
            moment_err = std::max(moment_err, std::abs(uncertainty(st, Quadrature::p) - q.delta_p));
            moment_err =
                std::max(moment_err, std::abs(uncertainty(st, Quadrature::x) - std::sqrt(dx0 * dx0 + t * t)));
        }
        const QuasiDistribution& s0 = r.snapshots.front();
        double minimum = std::abs(uncertainty(s0, Quadrature::x) * uncertainty(s0, Quadrature::p) - 0.5);
        std::string tag = "sigma " + std::to_string(sigma).substr(0, 3) + " ";
        o.require(tag + "end time 1", std::abs(r.times.back() - 1.0) < 1e-12);
        o.bound(tag + "state rel L2", state_err, 1e-5);
        o.bound(tag + "moments", moment_err, 1e-6);
        o.bound(tag + "initial dxdp-1/2", minimum, 1e-7);
    }
    return o;
}

Outcome coherent_orbit() {
    Outcome o;
    const double period = 2 * pi;
    std::vector<NamedObservable> obs{{"x", ObservableSpec(PolyH::x())}, {"p", ObservableSpec(PolyH::p())}};

    PhaseGrid g = make_square_grid(64, 8, 1.0);
    for (double sigma : {0.5, 0.3}) {
        CoherentParams cp{1.0, 0.5, 1.0, sigma};
        int steps = 420;
        EvolutionConfig cfg;
        cfg.method = EvolutionMethod::phase_space_rk4;
        cfg.dt = period / steps;
        cfg.steps = steps;
        cfg.snapshot_every = 20;
        cfg.observables = obs;
        EvolutionResult r = evolve_phase_space(coherent_state(cp, g).state, osc_H(), cfg);
        double center = 0.0, spread = 0.0;
        for (std::size_t s = 0; s < r.times.size(); ++s) {
            double t = r.times[s];
            center = std::max(center, std::abs(r.expectations[s]["x"] - coherent_center_x(cp, t)));
            center = std::max(center, std::abs(r.expectations[s]["p"] - coherent_center_p(cp, t)));
            const QuasiDistribution& st = r.snapshots[s];
            spread = std::max(spread, std::abs(uncertainty(st, Quadrature::x) * uncertainty(st, Quadrature::p) - 0.5));
        }
        std::string tag = "sigma " + std::to_string(sigma).substr(0, 3) + " ";
        o.require(tag + "full period", std::abs(r.times.back() - period) < 1e-9);
        o.bound(tag + "center", center, 1e-6);
        o.bound(tag + "dxdp-1/2", spread, 1e-6);
    }
    return o;
}

WaveFunction random_hermite_state(const Axis& ax, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    WaveFunction f = 0.0 * hermite_function(ax, 1.0, 0);
    for (int k = 0; k < 5; ++k) f += cplx(n(rng), n(rng)) * hermite_function(ax, 1.0, k);
    f *= 1.0 / f.norm();
    return f;
}

Outcome operator_bridge() {
    Outcome o;
    Axis ax = make_axis(128, -10, 10);
    PhaseGrid g = make_grid(128, 128, -10, 10, -10, 10, 1.0);
    OrderingSpec spec = OrderingSpec::moyal();
    ObservableSpec kinetic_plus_V(parse_polynomial("1/2*p^2"));
    kinetic_plus_V.add_x_only([](double x) -> cplx { return 1.0 - std::exp(-x * x / 2); });
    std::vector<ObservableSpec> observables{ObservableSpec(PolyH::x()), ObservableSpec(PolyH::p()),
                                            ObservableSpec(parse_polynomial("x^2")),
                                            ObservableSpec(parse_polynomial("p^2")),
                                            ObservableSpec(parse_polynomial("x*p^2")), kinetic_plus_V};
    std::vector<OrderedOperator> ops;
    for (const auto& A : observables) ops.emplace_back(A, spec, ax, 1.0);

    std::mt19937_64 rng(20240611);
    double left = 0.0, right = 0.0;
    for (int pair = 0; pair < 50; ++pair) {
        WaveFunction phi = random_hermite_state(ax, rng), psi = random_hermite_state(ax, rng);
        PhaseField T = twisted_tensor(phi, psi, spec, g).psi_field;
        for (std::size_t a = 0; a < observables.size(); ++a) {
            PhaseField want_l = twisted_tensor(phi, ops[a].apply(psi), spec, g).psi_field;
            left = std::max(left, rel_l2(bopp_apply(observables[a], T, Side::left, spec), want_l));
            PhaseField want_r = twisted_tensor(ops[a].apply_adjoint(phi), psi, spec, g).psi_field;
            right = std::max(right, rel_l2(bopp_apply(observables[a], T, Side::right, spec), want_r));
        }
    }
    o.bound("left rel L2", left, 1e-6);
    o.bound("right rel L2", right, 1e-6);
    return o;
}

PolyH random_poly(std::mt19937_64& rng, int max_deg, int terms) {
    std::uniform_int_distribution<int> deg(0, max_deg), coef(-2, 2);
    PolyH f;
    for (int t = 0; t < terms; ++t) {
        int n = deg(rng);
        int m = std::uniform_int_distribution<int>(0, max_deg - n)(rng);
        f.add(n, m, 0, cplx(coef(rng), coef(rng)));
    }
    return f;
}

Outcome symbolic_suite() {
    Outcome o;
    const cplx I(0.0, 1.0);
    const PolyH X = PolyH::x(), P = PolyH::p(), HB = PolyH::hbar();
    const double sigmas[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::mt19937_64 rng(31);
    auto t0 = clock_type::now();

    bool assoc = true;
    for (int t = 0; t < 20; ++t) {
        PolyH f = random_poly(rng, 6, 3), g = random_poly(rng, 6, 3), h = random_poly(rng, 6, 3);
        for (double s : {0.0, 0.5, 1.0}) assoc = assoc && pstar(pstar(f, g, s), h, s) == pstar(f, pstar(g, h, s), s);
    }
    o.require("associativity", assoc);

    bool slices = true;
    for (int t = 0; t < 20; ++t) {
        PolyH f = random_poly(rng, 6, 4), g = random_poly(rng, 6, 4);
        for (double s : sigmas) {
            slices = slices && pstar(f, g, s).hbar_slice(0) == f * g;
            PolyH first = pstar(f, g, s).hbar_slice(1) - pstar(g, f, s).hbar_slice(1);
            slices = slices && first == I * (HB * ppoisson(f, g));
        }
    }
    o.require("hbar^0/hbar^1 slices", slices);

    bool gauge = true;
    for (int t = 0; t < 10; ++t) {
        PolyH f = random_poly(rng, 5, 3), g = random_poly(rng, 5, 3);
        for (double s : {0.0, 0.5})
            for (double s2 : {0.5, 1.0}) {
                DiffOpWord G = DiffOpWord::gauge(s2 - s);
                gauge = gauge && apply_word(G, pstar(f, g, s)) == pstar(apply_word(G, f), apply_word(G, g), s2);
            }
    }
    o.require("gauge intertwining", gauge);

    bool ordering = true;
    for (double s : sigmas)
        ordering = ordering &&
                   sigma_order(X * P * P, s) == OperatorNF::monomial(1, 2) + OperatorNF::monomial(0, 1, 1, -2.0 * I * s);
    o.require("x p^2 ordering", ordering);

    const double a = 0.5, b = 0.25, c = 0.75;
    PolyH A = 0.5 * (P * P) + (1.0 / 6.0) * (P * P * P) + 0.5 * (X * X);
    PolyH want = A - (I * b) * (HB * X * (PolyH(1.0) + P)) + (0.5 * a * b + c) * (HB * HB);
    o.require("three-parameter inverse", apply_word(DiffOpWord::three_parameter(a, b, c), A, true) == want);

    o.bound("runtime s", seconds_since(t0), 1.0);
    return o;
}

Outcome classical_limits() {
    Outcome o;
    auto testfn = [](double x, double p) {
        return std::exp(-0.5 * (x - 0.3) * (x - 0.3) - 0.3 * p * p) * (1 + 0.2 * x * p);
    };
    std::vector<double> hbars{0.2, 0.1, 0.05, 0.025};
    auto family = [&](const char* name, const std::function<QuasiDistribution(double)>& make, double xc, double pc) {
        auto vals = classical_limit_probe(make, testfn, hbars);
        std::vector<double> err;
        for (auto v : vals) err.push_back(std::abs(v - testfn(xc, pc)));
        bool monotone = true;
        for (std::size_t k = 1; k < err.size(); ++k) monotone = monotone && err[k] < err[k - 1];
        char buf[120];
        std::snprintf(buf, sizeof buf, "%s errors %.2e>%.2e>%.2e>%.2e", name, err[0], err[1], err[2], err[3]);
        o.require(buf, monotone);
    };
    const double p0 = 0.8, t = 1.0;
    family(
        "free",
        [&](double h) {
            double s = std::sqrt(h);
            return free_gaussian({p0, s, 0.5}, t,
                                 make_grid(128, 128, p0 * t - 12 * s, p0 * t + 12 * s, p0 - 8 * s, p0 + 8 * s, h));
        },
        p0 * t, p0);
    family(
        "stationary", [](double h) { return ho_state(2, 2, OscillatorParams{}, make_square_grid(128, 8 * std::sqrt(h), h)); },
        0.0, 0.0);
    family(
        "coherent",
        [](double h) {
            double s = 8 * std::sqrt(h);
            return coherent_state({0.5, -0.4, 1.0, 0.5}, make_grid(128, 128, 0.5 - s, 0.5 + s, -0.4 - s, -0.4 + s, h))
                .state;
        },
        0.5, -0.4);
    return o;
}

Outcome state_space_structure() {
    Outcome o;
    PhaseGrid g = make_square_grid(64, 8, 1.0);
    double idem = 0.0;
    for (const OrderingSpec& spec : {OrderingSpec::moyal(), OrderingSpec{0.2}, OrderingSpec::gaussian(0.5, 0.2, 0.3)})
        for (int i = 0; i <= 3; ++i)
            for (int j = 0; j <= 3; ++j)
                for (int k = 0; k <= 3; ++k)
                    for (int l = 0; l <= 3; ++l) idem = std::max(idem, basis_idempotence_check(i, j, k, l, spec, g));
    o.bound("idempotence residual", idem, 1e-6);

    std::mt19937_64 rng(77);
    double norm_excess = 0.0, trace = 0.0, moyal_trace = 0.0;
    const double norm_slack = 1e-9;
    for (int pair = 0; pair < 100; ++pair) {
        PhaseField f = random_gaussian_mixture(g, rng), h = random_gaussian_mixture(g, rng);
        double scale = l2_norm(f) * l2_norm(h);
        double bound = scale / std::sqrt(2 * pi * g.hbar);
        for (double sigma : {0.0, 0.5, 1.0}) {
            PhaseField fh = star_sigma(f, h, sigma);
            norm_excess = std::max(norm_excess, (l2_norm(fh) - bound) / bound);
            trace = std::max(trace, std::abs(integrate(fh) - integrate(star_sigma(h, f, sigma))) / scale);
            if (sigma == 0.5) moyal_trace = std::max(moyal_trace, std::abs(integrate(fh) - integrate(hadamard(f, h))) / scale);
        }
    }
    o.bound("norm bound excess", norm_excess, norm_slack);
    o.bound("trace commutator", trace, 1e-8);
    o.bound("Moyal trace vs pointwise", moyal_trace, 1e-8);
    return o;
}

} // namespace

int main() {
    report(1, "oscillator spectrum", oscillator_spectrum);
    report(2, "gauge invariance of spectra", gauge_invariance);
    report(3, "stationary-state oracle genvalue residuals", stationary_states);
    report(4, "ladder construction equals closed form", ladder_closed_form);
    report(5, "free-particle dynamics", free_particle);
    report(6, "coherent-state orbit", coherent_orbit);
    report(7, "operator bridge on random Hermite pairs", operator_bridge);
    report(8, "symbolic exactness", symbolic_suite);
    report(9, "classical limits", classical_limits);
    report(10, "state-space structure", state_space_structure);
    std::printf("acceptance: %d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
