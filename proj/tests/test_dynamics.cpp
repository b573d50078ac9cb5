#include <doctest.h>

#include "helpers.hpp"
#include "psq/dynamics.hpp"
#include "psq/error.hpp"
#include "psq/oracles.hpp"
#include "psq/spectra.hpp"

using namespace psq;
using namespace psq::testing;

namespace {

const double two_pi = 2 * pi;

ObservableSpec free_H() { return ObservableSpec(parse_polynomial("1/2*p^2")); }
ObservableSpec osc_H() { return ObservableSpec(oscillator_hamiltonian(1.0)); }

std::vector<NamedObservable> moments() {
    return {{"x", ObservableSpec(PolyH::x())},
            {"p", ObservableSpec(PolyH::p())},
            {"x2", ObservableSpec(parse_polynomial("x^2"))},
            {"p2", ObservableSpec(parse_polynomial("p^2"))}};
}

double spread(std::map<std::string, cplx>& e, const char* v) {
    std::string s(v);
    return std::sqrt(e[s + "2"].real() - e[s].real() * e[s].real());
}

// Coherent wavefunction of the unit oscillator centered at (xb, pb).
WaveFunction coherent_wave(const Axis& ax, double hbar, double xb, double pb) {
    return WaveFunction::sample(ax, hbar, [&](double x) -> cplx {
        return std::pow(pi * hbar, -0.25) * std::exp(-(x - xb) * (x - xb) / (2 * hbar) + cplx(0, pb * x / hbar));
    });
}

EvolutionConfig rk4(double dt, int steps, int every = 0) {
    EvolutionConfig c;
    c.method = EvolutionMethod::phase_space_rk4;
    c.dt = dt;
    c.steps = steps;
    c.snapshot_every = every;
    return c;
}

double sup_diff(const WaveFunction& a, const WaveFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

} // namespace

TEST_CASE("split-step free packet matches the closed form") {
    Axis ax = make_axis(512, -24, 24);
    FreeGaussianParams q{1.0, 1.0, 0.5};
    EvolutionConfig cfg;
    cfg.dt = 1e-3;
    cfg.steps = 1000;
    cfg.tensor_snapshots = false;
    EvolutionResult r = evolve_schrodinger(free_gaussian_wave(q, 0.0, ax, 1.0), free_H(), OrderingSpec::moyal(), cfg);
    CHECK(sup_diff(r.wavefunctions.back(), free_gaussian_wave(q, 1.0, ax, 1.0)) < 1e-7);
    CHECK(std::abs(r.norms.back() - r.norms.front()) < 1e-12);
}

TEST_CASE("single Fourier mode acquires the free phase") {
    Axis ax = make_axis(64, -pi, pi);
    const double hbar = 0.7;
    for (std::size_t k : {20, 35, 40}) {
        double pk = ax.conj_point(k, hbar);
        WaveFunction f = WaveFunction::sample(ax, hbar, [&](double x) { return std::exp(cplx(0, pk * x / hbar)); });
        EvolutionConfig cfg;
        cfg.dt = 0.01;
        cfg.steps = 50;
        cfg.tensor_snapshots = false;
        EvolutionResult r = evolve_schrodinger(f, free_H(), OrderingSpec::moyal(), cfg);
        WaveFunction expect = std::exp(cplx(0, -0.5 * pk * pk * 0.5 / hbar)) * f;
        CHECK(sup_diff(r.wavefunctions.back(), expect) < 1e-11);
    }
}

TEST_CASE("free packet: re-tensored snapshots, moments and uncertainty law") {
    Axis ax = make_axis(256, -24, 24);
    PhaseGrid g = make_grid(256, 256, -24, 24, -10, 10, 1.0);
    FreeGaussianParams q{1.0, 1.0, 0.5};
    for (double sigma : {0.5, 0.3}) {
        q.sigma = sigma;
        EvolutionConfig cfg;
        cfg.dt = 1e-3;
        cfg.steps = 1000;
        cfg.snapshot_every = 500;
        cfg.snapshot_grid = g;
        EvolutionResult r = evolve_schrodinger(free_gaussian_wave(q, 0.0, ax, 1.0), free_H(), OrderingSpec{sigma}, cfg);
        REQUIRE(r.snapshots.size() == 3);
        for (std::size_t s = 0; s < 3; ++s) {
            double t = r.times[s];
            const QuasiDistribution& st = r.snapshots[s];
            INFO("sigma " << sigma << " t " << t);
            CHECK(rel_l2(st.psi_field, free_gaussian(q, t, g).psi_field) < 1e-5);
            CHECK(std::abs(expectation(ObservableSpec(PolyH::x()), st) - q.p0 * t) < 1e-6);
            CHECK(std::abs(uncertainty(st, Quadrature::p) - q.delta_p) < 1e-6);
            double dx0 = q.delta_x(1.0);
            CHECK(std::abs(uncertainty(st, Quadrature::x) - std::sqrt(dx0 * dx0 + t * t)) < 1e-6);
        }
        CHECK(std::abs(uncertainty(r.snapshots[0], Quadrature::x) * uncertainty(r.snapshots[0], Quadrature::p) - 0.5) <
              1e-7);
    }
}

TEST_CASE("phase-space RK4 free packet matches the closed form") {
    PhaseGrid g = make_grid(256, 128, -24, 24, -8, 8, 1.0);
    FreeGaussianParams q{1.0, 1.0, 0.5};
    for (double sigma : {0.5, 0.2}) {
        q.sigma = sigma;
        EvolutionConfig cfg = rk4(0.01, 100);
        cfg.observables = {{"x", ObservableSpec(PolyH::x())}};
        EvolutionResult r = evolve_phase_space(free_gaussian(q, 0.0, g), free_H(), cfg);
        INFO("sigma " << sigma);
        CHECK(rel_l2(r.snapshots.back().psi_field, free_gaussian(q, 1.0, g).psi_field) < 1e-5);
        CHECK(std::abs(r.masses.back() - r.masses.front()) < 1e-8);
        CHECK(std::abs(r.norms.back() - r.norms.front()) < 1e-6 * r.norms.front());
        CHECK(std::abs(r.expectations.back()["x"] - 1.0) < 1e-6);
    }
}

TEST_CASE("oscillator eigenstate keeps its modulus and rotates with E_n") {
    Axis ax = make_axis(256, -10, 10);
    SpectralResult sr = spectrum_via_schrodinger(osc_H(), OrderingSpec::moyal(), 4, ax, 1.0);
    for (int n : {0, 2, 3}) {
        EvolutionConfig cfg;
        cfg.dt = 1e-3;
        cfg.steps = 500;
        cfg.tensor_snapshots = false;
        EvolutionResult r = evolve_schrodinger(sr.wavefunctions[n], osc_H(), OrderingSpec::moyal(), cfg);
        const WaveFunction& f = r.wavefunctions.back();
        double dmod = 0.0;
        for (std::size_t i = 0; i < f.values.size(); ++i)
            dmod = std::max(dmod, std::abs(std::abs(f.values[i]) - std::abs(sr.wavefunctions[n].values[i])));
        CHECK(dmod < 1e-6);
        double E = -std::arg(sr.wavefunctions[n].inner(f)) / 0.5;
        INFO("n " << n);
        CHECK(std::abs(E - sr.energies[n]) < 1e-6);
    }
}

TEST_CASE("coherent orbit over one period, Schrodinger picture") {
    Axis ax = make_axis(256, -10, 10);
    CoherentParams cp{1.0, 0.5, 1.0, 0.5};
    int steps = 6284;
    EvolutionConfig cfg;
    cfg.dt = two_pi / steps;
    cfg.steps = steps;
    cfg.snapshot_every = steps / 4;
    cfg.tensor_snapshots = false;
    cfg.observables = moments();
    for (double sigma : {0.5, 0.0, 1.0}) {
        EvolutionResult r = evolve_schrodinger(coherent_wave(ax, 1.0, cp.x_bar, cp.p_bar), osc_H(), OrderingSpec{sigma}, cfg);
        for (std::size_t s = 0; s < r.times.size(); ++s) {
            auto& e = r.expectations[s];
            INFO("sigma " << sigma << " t " << r.times[s]);
            CHECK(std::abs(e["x"].real() - coherent_center_x(cp, r.times[s])) < 1e-6);
            CHECK(std::abs(e["p"].real() - coherent_center_p(cp, r.times[s])) < 1e-6);
            CHECK(std::abs(spread(e, "x") * spread(e, "p") - 0.5) < 1e-6);
        }
    }
}

TEST_CASE("coherent orbit over one period, phase-space RK4") {
    PhaseGrid g = make_square_grid(64, 8, 1.0);
    CoherentParams cp{1.0, 0.5, 1.0, 0.3};
    QuasiDistribution c0 = coherent_state(cp, g).state;
    int steps = 420;
    EvolutionConfig cfg = rk4(two_pi / steps, steps, steps / 4);
    cfg.observables = {{"x", ObservableSpec(PolyH::x())}, {"p", ObservableSpec(PolyH::p())}};
    EvolutionResult r = evolve_phase_space(c0, osc_H(), cfg);
    for (std::size_t s = 0; s < r.times.size(); ++s) {
        double t = r.times[s];
        INFO("t " << t);
        CHECK(std::abs(r.expectations[s]["x"].real() - coherent_center_x(cp, t)) < 1e-6);
        CHECK(std::abs(r.expectations[s]["p"].real() - coherent_center_p(cp, t)) < 1e-6);
        const QuasiDistribution& st = r.snapshots[s];
        CHECK(std::abs(uncertainty(st, Quadrature::x) * uncertainty(st, Quadrature::p) - 0.5) < 1e-6);
        CHECK(std::abs(r.masses[s] - r.masses[0]) < 1e-8);
    }
    CoherentParams moved = cp;
    moved.x_bar = coherent_center_x(cp, r.times.back());
    moved.p_bar = coherent_center_p(cp, r.times.back());
    CHECK(rel_l2(r.snapshots.back().psi_field, coherent_state(moved, g).state.psi_field) < 1e-6);
}

TEST_CASE("quadratic Hamiltonian: quantum and Liouville flows agree") {
    PhaseGrid g = make_square_grid(64, 8, 1.0);
    QuasiDistribution c0 = coherent_state({1.0, -0.5, 1.0, 0.5}, g).state;
    EvolutionConfig q = rk4(0.01, 100);
    EvolutionConfig c = q;
    c.classical = true;
    EvolutionResult rq = evolve_phase_space(c0, osc_H(), q);
    EvolutionResult rc = evolve_phase_space(c0, osc_H(), c);
    CHECK(max_abs_diff(rq.snapshots.back().psi_field, rc.snapshots.back().psi_field) < 1e-6);
    // A quartic term separates them.
    ObservableSpec H4(parse_polynomial("1/2*p^2 + 1/2*x^2 + 0.05*x^4"));
    EvolutionConfig q4 = rk4(0.001, 100), c4 = q4;
    c4.classical = true;
    CHECK(max_abs_diff(evolve_phase_space(c0, H4, q4).snapshots.back().psi_field,
                       evolve_phase_space(c0, H4, c4).snapshots.back().psi_field) > 1e-4);
}

TEST_CASE("stationary states do not change over one period") {
    PhaseGrid g = make_square_grid(64, 8, 1.0);
    int steps = 420;
    for (int n = 0; n <= 2; ++n) {
        QuasiDistribution s0 = ho_state(n, n, OscillatorParams{}, g);
        EvolutionResult r = evolve_phase_space(s0, osc_H(), rk4(two_pi / steps, steps));
        INFO("n " << n);
        CHECK(l2_norm(r.snapshots.back().psi_field - s0.psi_field) < 1e-6);
        CHECK(std::abs(r.masses.back() - r.masses.front()) < 1e-8);
    }
    // smoothed stationary state, quarter period
    OscillatorParams q{1.0, 0.5, 0.1, 0.1};
    QuasiDistribution s1 = ho_state(1, 1, q, g);
    EvolutionResult r = evolve_phase_space(s1, osc_H(), rk4(two_pi / steps, steps / 4));
    CHECK(l2_norm(r.snapshots.back().psi_field - s1.psi_field) < 1e-6);
}

TEST_CASE("picture equivalence: Schrodinger plus tensor against phase-space evolution") {
    Axis ax = make_axis(128, -8, 8);
    PhaseGrid g = make_square_grid(128, 8, 1.0);
    struct Case {
        const char* name;
        ObservableSpec H;
        WaveFunction phi0;
    };
    std::vector<Case> cases{{"free", free_H(), free_gaussian_wave({0.5, 1.0, 0.5}, 0.0, ax, 1.0)},
                            {"oscillator", osc_H(), coherent_wave(ax, 1.0, 1.0, 0.5)}};
    for (const auto& c : cases)
        for (double sigma : {0.5, 0.3}) {
            OrderingSpec spec{sigma};
            EvolutionConfig s;
            s.dt = 1e-3;
            s.steps = 500;
            s.snapshot_every = 250;
            EvolutionResult rs = evolve_schrodinger(c.phi0, c.H, spec, s);
            EvolutionResult rp = evolve_phase_space(twisted_tensor(c.phi0, c.phi0, spec, g), c.H, rk4(0.005, 100, 50));
            REQUIRE(rs.snapshots.size() == rp.snapshots.size());
            for (std::size_t k = 0; k < rs.snapshots.size(); ++k) {
                INFO(c.name << " sigma " << sigma << " t " << rs.times[k]);
                CHECK(rel_l2(rp.snapshots[k].psi_field, rs.snapshots[k].psi_field) < 1e-5);
            }
        }
}

TEST_CASE("convergence order on the coherent-state benchmark") {
    SUBCASE("split-step is second order") {
        Axis ax = make_axis(128, -10, 10);
        WaveFunction f0 = coherent_wave(ax, 1.0, 1.0, 0.5);
        ObservableSpec H(parse_polynomial("1/2*p^2 + 1/2*x^2 + 0.1*x^4"));
        EvolutionConfig exact;
        exact.method = EvolutionMethod::matrix_exponential;
        exact.dt = 1.0;
        exact.steps = 1;
        exact.tensor_snapshots = false;
        WaveFunction ref = evolve_schrodinger(f0, H, OrderingSpec::moyal(), exact).wavefunctions.back();
        auto err = [&](int steps) {
            EvolutionConfig c;
            c.dt = 1.0 / steps;
            c.steps = steps;
            c.tensor_snapshots = false;
            return (evolve_schrodinger(f0, H, OrderingSpec::moyal(), c).wavefunctions.back() - ref).norm();
        };
        double ratio = err(20) / err(40);
        CHECK(ratio > 4 * 0.8);
        CHECK(ratio < 4 * 1.2);
    }
    SUBCASE("phase-space RK4 is fourth order") {
        PhaseGrid g = make_square_grid(64, 8, 1.0);
        CoherentParams cp{1.0, 0.5, 1.0, 0.5};
        QuasiDistribution c0 = coherent_state(cp, g).state;
        CoherentParams moved = cp;
        moved.x_bar = coherent_center_x(cp, 0.5);
        moved.p_bar = coherent_center_p(cp, 0.5);
        PhaseField ref = coherent_state(moved, g).state.psi_field;
        auto err = [&](int steps) {
            return l2_norm(evolve_phase_space(c0, osc_H(), rk4(0.5 / steps, steps)).snapshots.back().psi_field - ref);
        };
        double e1 = err(40), e2 = err(80);
        INFO("errors " << e1 << " " << e2);
        CHECK(e1 / e2 > 16 * 0.8);
        CHECK(e1 / e2 < 16 * 1.2);
    }
}

TEST_CASE("RK4 stability bound") {
    PhaseGrid g = make_square_grid(64, 8, 1.0);
    // oscillator: max |dH/dp| = max |dH/dx| = 8, dx = dp = 0.25
    CHECK(rk4_stability_bound(osc_H(), OrderingSpec::moyal(), g) == doctest::Approx(0.5 * 0.25 / 8.0));
    QuasiDistribution c0 = coherent_state({0.0, 0.0, 1.0, 0.5}, g).state;
    try {
        evolve_phase_space(c0, osc_H(), rk4(0.05, 2));
        FAIL("expected a stability error");
    } catch (const NumericalPrecondition& e) {
        CHECK(std::string(e.what()).find("dt <= 0.015625") != std::string::npos);
    }
    // sigma != 1/2 adds second-order terms, which dominate on a fine p axis
    PhaseGrid fine = make_square_grid(128, 4, 1.0);
    ObservableSpec H4(parse_polynomial("1/2*p^2 + 1/4*x^4"));
    CHECK(rk4_stability_bound(H4, OrderingSpec{0.0}, fine) < rk4_stability_bound(H4, OrderingSpec{0.5}, fine));
}

TEST_CASE("star exponential") {
    PhaseGrid g = make_square_grid(32, 3, 1.0);
    PhaseField one = star_exponential(osc_H(), 0.0, 12, OrderingSpec::moyal(), g);
    CHECK(max_abs_diff(one, PhaseField(g, 1.0)) == 0.0);

    PolyH H = oscillator_hamiltonian(1.0);
    PolyH U = star_exponential_symbol(H, 0.1, 12, 0.5);
    PolyH UU = pstar(U, U.conj(), 0.5);
    CHECK(max_abs_diff(sample_polynomial(UU, g), PhaseField(g, 1.0)) < 1e-9);
    // The Moyal exponential of the oscillator has the closed form
    // sec(t/2) exp(-(2i/hbar) tan(t/2) H).
    PhaseField closed = PhaseField::sample(g, [&](double x, double p) {
        return std::exp(cplx(0, -2.0 * std::tan(0.05)) * (0.5 * (x * x + p * p))) / std::cos(0.05);
    });
    CHECK(max_abs_diff(star_exponential(osc_H(), 0.1, 12, OrderingSpec::moyal(), g), closed) < 1e-9);

    CHECK_THROWS_AS(star_exponential(osc_H(), 1.0, 4, OrderingSpec::moyal(), g), NumericalPrecondition);
    CHECK_THROWS_AS(star_exponential(osc_H(), 0.1, 21, OrderingSpec::moyal(), g), InvalidArgument);
    ObservableSpec V = ObservableSpec::x_only([](double x) -> cplx { return x * x; });
    CHECK_THROWS_AS(star_exponential(V, 0.1, 8, OrderingSpec::moyal(), g), Unsupported);
}

TEST_CASE("star-exponential propagator matches RK4 evolution") {
    PhaseGrid g = make_square_grid(64, 5, 1.0);
    for (double sigma : {0.5, 0.25}) {
        QuasiDistribution c0 = coherent_state({0.3, -0.2, 1.0, sigma}, g).state;
        EvolutionConfig se;
        se.method = EvolutionMethod::star_exponential;
        se.dt = 0.05;
        se.steps = 2;
        se.order = 18;
        EvolutionResult a = evolve_phase_space(c0, osc_H(), se);
        EvolutionResult b = evolve_phase_space(c0, osc_H(), rk4(0.01, 10));
        INFO("sigma " << sigma);
        CHECK(rel_l2(a.snapshots.back().psi_field, b.snapshots.back().psi_field) < 1e-6);
    }
}

TEST_CASE("Heisenberg trajectories") {
    SUBCASE("free particle: d<x>/dt = <p>") {
        Axis ax = make_axis(256, -24, 24);
        FreeGaussianParams q{1.0, 1.0, 0.5};
        EvolutionConfig cfg;
        cfg.dt = 1e-2;
        cfg.steps = 100;
        HeisenbergTrajectory t = heisenberg_trajectory(ObservableSpec(PolyH::x()), free_gaussian_wave(q, 0.0, ax, 1.0),
                                                       free_H(), OrderingSpec{0.3}, cfg);
        REQUIRE(t.values.size() == 101);
        CHECK(t.max_residual < 1e-6);
        for (std::size_t k = 0; k < t.values.size(); ++k) CHECK(std::abs(t.bracket_values[k] - 1.0) < 1e-6);
    }
    SUBCASE("oscillator: <H> is conserved") {
        PhaseGrid g = make_square_grid(64, 8, 1.0);
        QuasiDistribution c0 = coherent_state({1.0, 0.5, 1.0, 0.5}, g).state;
        HeisenbergTrajectory t = heisenberg_trajectory(osc_H(), c0, osc_H(), rk4(0.01, 100));
        for (auto v : t.values) CHECK(std::abs(v - t.values.front()) < 1e-8);
        CHECK(t.max_residual < 1e-8);
        HeisenbergTrajectory tx = heisenberg_trajectory(ObservableSpec(PolyH::x()), c0, osc_H(), rk4(0.01, 100));
        CHECK(tx.max_residual < 1e-5);
    }
    SUBCASE("both pictures give one prediction") {
        PhaseGrid g = make_square_grid(64, 8, 1.0);
        for (double sigma : {0.5, 0.3}) {
            QuasiDistribution c0 = coherent_state({1.0, 0.5, 1.0, sigma}, g).state;
            PolyH xt = heisenberg_observable(PolyH::x(), oscillator_hamiltonian(1.0), 0.3, 20, OrderingSpec{sigma}, g);
            CHECK(std::abs(xt.coefficient(1, 0) - std::cos(0.3)) < 1e-12);
            CHECK(std::abs(xt.coefficient(0, 1) - std::sin(0.3)) < 1e-12);
            EvolutionConfig cfg = rk4(0.01, 30);
            cfg.observables = {{"x", ObservableSpec(PolyH::x())}};
            EvolutionResult r = evolve_phase_space(c0, osc_H(), cfg);
            CHECK(std::abs(r.expectations.back()["x"] - expectation(ObservableSpec(xt), c0)) < 1e-6);
        }
    }
}

TEST_CASE("matrix exponential handles coupled Hamiltonians") {
    Axis ax = make_axis(128, -10, 10);
    ObservableSpec H(parse_polynomial("1/2*p^2 + 1/2*x^2 + 0.2*x*p"));
    WaveFunction f0 = coherent_wave(ax, 1.0, 1.0, 0.0);
    EvolutionConfig split;
    split.tensor_snapshots = false;
    try {
        evolve_schrodinger(f0, H, OrderingSpec::moyal(), split);
        FAIL("expected split-step to reject x p");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("matrix_exponential") != std::string::npos);
    }
    EvolutionConfig mx = split;
    mx.method = EvolutionMethod::matrix_exponential;
    mx.dt = 0.1;
    mx.steps = 20;
    mx.observables = {{"H", H}};
    EvolutionResult r = evolve_schrodinger(f0, H, OrderingSpec::moyal(), mx);
    CHECK(std::abs(r.norms.back() - 1.0) < 1e-10);
    CHECK(std::abs(r.expectations.back()["H"] - r.expectations.front()["H"]) < 1e-10);
    CHECK_THROWS_AS(evolve_schrodinger(f0, ObservableSpec(parse_polynomial("1/2*p^2 + i*x")), OrderingSpec::moyal(), mx),
                    InvalidArgument);
}

TEST_CASE("evolution configuration errors") {
    Axis ax = make_axis(64, -8, 8);
    PhaseGrid g = make_square_grid(64, 8, 1.0);
    WaveFunction f0 = coherent_wave(ax, 1.0, 0.0, 0.0);
    QuasiDistribution c0 = coherent_state({0.0, 0.0, 1.0, 0.5}, g).state;
    EvolutionConfig bad;
    bad.dt = -1.0;
    CHECK_THROWS_AS(evolve_schrodinger(f0, osc_H(), OrderingSpec::moyal(), bad), InvalidArgument);
    bad.dt = 0.01;
    bad.steps = 0;
    CHECK_THROWS_AS(evolve_schrodinger(f0, osc_H(), OrderingSpec::moyal(), bad), InvalidArgument);
    CHECK_THROWS_AS(evolve_schrodinger(f0, osc_H(), OrderingSpec::moyal(), rk4(0.01, 1)), InvalidArgument);
    EvolutionConfig split;
    CHECK_THROWS_AS(evolve_phase_space(c0, osc_H(), split), InvalidArgument);
    EvolutionConfig se;
    se.method = EvolutionMethod::star_exponential;
    se.order = 25;
    CHECK_THROWS_AS(evolve_phase_space(c0, osc_H(), se), InvalidArgument);
    EvolutionConfig cl = rk4(0.01, 1);
    cl.classical = true;
    QuasiDistribution smooth = ho_state(0, 0, OscillatorParams{1.0, 0.5, 0.1, 0.1}, g);
    CHECK_THROWS_AS(evolve_phase_space(smooth, osc_H(), cl), InvalidArgument);
    EvolutionConfig obs = rk4(0.01, 1);
    obs.observables = {{"x", ObservableSpec(PolyH::x())}};
    QuasiDistribution off = ho_state(1, 0, OscillatorParams{}, g);
    CHECK_THROWS_AS(evolve_phase_space(off, osc_H(), obs), InvalidArgument);
}
