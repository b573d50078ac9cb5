#include "scenarios.hpp"

#include "psq/dynamics.hpp"
#include "psq/error.hpp"
#include "psq/field_io.hpp"
#include "psq/oracles.hpp"
#include "psq/polystar.hpp"
#include "psq/spectra.hpp"
#include "psq/starnum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace psq::cli {

namespace {

constexpr double pi = std::numbers::pi;

double num(const json& j, const char* key, double fallback) { return j.contains(key) ? j[key].get<double>() : fallback; }
int integer(const json& j, const char* key, int fallback) { return j.contains(key) ? j[key].get<int>() : fallback; }
bool flag(const json& j, const char* key, bool fallback) { return j.contains(key) ? j[key].get<bool>() : fallback; }
std::string text(const json& j, const char* key, const std::string& fallback) {
    return j.contains(key) ? j[key].get<std::string>() : fallback;
}

std::pair<double, double> span(const json& j, const char* key, std::pair<double, double> fallback) {
    if (!j.contains(key)) return fallback;
    double lo = j[key][0].get<double>(), hi = j[key][1].get<double>();
    if (!(lo < hi)) throw InvalidArgument(std::string("grid.") + key + ": lower bound must be below upper bound");
    return {lo, hi};
}

std::string join_csv(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
    return s + "\n";
}

std::string fmt(double v) { return format_real(v); }

PolyH parse_named(const std::string& expr, const char* what) {
    try {
        return parse_polynomial(expr);
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(std::string(what) + ": " + e.what());
    }
}

std::optional<DiffOpWord> word_of(const Context& c) {
    auto w = smoother_word(c.spec);
    if (!w) throw Unsupported("smoother has no symbolic form");
    return w;
}

double mass_of(const PhaseField& psi) { return integrate(psi).real() / std::sqrt(2 * pi * psi.grid.hbar); }

} // namespace

void Context::emit_field(const std::string& stem, const PhaseField& f) const {
    if (bin) {
        std::ostringstream os(std::ios::binary);
        write_field(os, f);
        stage->write(stem + ".psqf", os.str());
    }
    if (csv) {
        std::ostringstream os;
        write_field_csv(os, f);
        stage->write(stem + ".csv", os.str());
    }
    if (dat) stage->write(stem + ".dat", field_dat(f));
}

void Context::emit_quasi(const std::string& stem, const QuasiDistribution& q) const {
    emit_field(stem, q.psi_field);
    stage->write(stem + ".psqf.json", quasi_sidecar(q) + "\n");
}

void Context::emit_text(const std::string& name, const std::string& t) const { stage->write(name, t); }

void Context::emit_json(const std::string& name, const json& j) const { stage->write(name, j.dump(2) + "\n"); }

std::string field_dat(const PhaseField& f) {
    std::string s = "# x p re im\n";
    for (std::size_t i = 0; i < f.grid.nx(); ++i) {
        if (i) s += "\n";
        for (std::size_t j = 0; j < f.grid.np(); ++j) {
            cplx v = f(i, j);
            s += fmt(f.grid.x.point(i)) + " " + fmt(f.grid.p.point(j)) + " " + fmt(v.real()) + " " + fmt(v.imag()) +
                 "\n";
        }
    }
    return s;
}

PhaseField random_mixture(const PhaseGrid& g, std::uint64_t seed, unsigned stream, int terms) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    std::mt19937_64 rng(seq);
    // Raw engine output mapped by hand: the standard distributions are not
    // specified bit-for-bit across library implementations.
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * (double(rng() >> 11) * 0x1.0p-53); };
    double s = std::sqrt(g.hbar);
    PhaseField f(g);
    for (int t = 0; t < terms; ++t) {
        cplx coef(uniform(-1, 1), uniform(-1, 1));
        double a = s * uniform(-1, 1), b = s * uniform(-1, 1);
        double sx = s * uniform(0.8, 1.1), sp = s * uniform(0.8, 1.1);
        for (std::size_t i = 0; i < g.nx(); ++i)
            for (std::size_t j = 0; j < g.np(); ++j) {
                double x = g.x.point(i) - a, p = g.p.point(j) - b;
                f(i, j) += coef * std::exp(-x * x / (2 * sx * sx) - p * p / (2 * sp * sp));
            }
    }
    return f;
}

Context resolve_context(const json& config) {
    Context c;
    c.config = config;
    c.params = config.value("params", json::object());
    json grid = config.value("grid", json::object());
    auto xs = span(grid, "x_span", {-8.0, 8.0});
    auto ps = span(grid, "p_span", xs);
    c.grid = make_grid(grid.value("nx", 128), grid.value("np", 128), xs.first, xs.second, ps.first, ps.second,
                       grid.value("hbar", 1.0));

    json ord = config.value("ordering", json::object());
    c.alpha = num(ord, "alpha", 0.0);
    c.beta = num(ord, "beta", 0.0);
    std::string kind = text(ord, "smoother", (ord.contains("alpha") || ord.contains("beta")) ? "gaussian" : "identity");
    if (kind == "identity" && (c.alpha != 0.0 || c.beta != 0.0))
        throw InvalidArgument("ordering: alpha and beta need smoother \"gaussian\"");
    c.spec.sigma = num(ord, "sigma", 0.5);
    if (kind == "gaussian") c.spec.smoother = GaussianSmoother{c.alpha, c.beta};

    json out = config.at("output");
    if (out.contains("formats")) {
        c.csv = c.bin = c.dat = false;
        for (const auto& f : out["formats"]) {
            std::string s = f.get<std::string>();
            c.csv = c.csv || s == "csv";
            c.bin = c.bin || s == "bin";
            c.dat = c.dat || s == "dat";
        }
    }
    c.seed = config.value("seed", std::uint64_t{0});
    return c;
}

void run_spectrum(const Context& c) {
    const json& p = c.params;
    ObservableSpec H(parse_named(p.at("hamiltonian").get<std::string>(), "hamiltonian"));
    int levels = integer(p, "levels", 5);
    SpectrumOptions opts;
    opts.compute_residuals = flag(p, "residuals", true);
    SpectralResult r = spectrum_via_schrodinger(H, c.spec, levels, c.grid.x, c.grid.hbar, opts);

    std::string table = join_csv({"n", "E_n", "residual_left", "residual_right"});
    for (int n = 0; n < levels; ++n) {
        double rl = NAN, rr = NAN;
        if (!r.residuals.empty()) {
            rl = r.residuals[n].left;
            rr = r.residuals[n].right;
        }
        table += join_csv({std::to_string(n), fmt(r.energies[n]), fmt(rl), fmt(rr)});
        *c.log << "E_" << n << " = " << fmt(r.energies[n]) << "\n";
    }
    c.emit_text("spectrum.csv", table);

    std::vector<std::string> head{"x"};
    for (int n = 0; n < levels; ++n) {
        head.push_back("re_phi" + std::to_string(n));
        head.push_back("im_phi" + std::to_string(n));
    }
    std::string waves = join_csv(head);
    for (std::size_t i = 0; i < c.grid.nx(); ++i) {
        std::vector<std::string> row{fmt(c.grid.x.point(i))};
        for (int n = 0; n < levels; ++n) {
            row.push_back(fmt(r.wavefunctions[n].values[i].real()));
            row.push_back(fmt(r.wavefunctions[n].values[i].imag()));
        }
        waves += join_csv(row);
    }
    c.emit_text("wavefunctions.csv", waves);

    if (flag(p, "eigenfields", false))
        for (int n = 0; n < levels; ++n) c.emit_quasi("eigenfield_" + std::to_string(n), eigenfield(r, n, n));
}

void run_gauge_check(const Context& c) {
    const json& p = c.params;
    ObservableSpec H(parse_named(p.at("hamiltonian").get<std::string>(), "hamiltonian"));
    int levels = integer(p, "levels", 5);
    std::vector<double> sigmas = p.value("sigmas", std::vector<double>{0.0, 0.5, 1.0});
    std::vector<Smoother> smoothers;
    for (const auto& s : p.value("smoothers", json::array({json::object()}))) {
        double a = num(s, "alpha", 0.0), b = num(s, "beta", 0.0);
        if (a == 0.0 && b == 0.0) smoothers.push_back(IdentitySmoother{});
        else smoothers.push_back(GaussianSmoother{a, b});
    }
    GaugeSpectrumReport rep = gauge_spectrum_check(H, sigmas, smoothers, levels, c.grid.x, c.grid.hbar);

    std::string table = join_csv({"ordering", "sigma", "alpha", "beta", "n", "E_n"});
    for (std::size_t k = 0; k < rep.orderings.size(); ++k) {
        const OrderingSpec& o = rep.orderings[k];
        double a = 0.0, b = 0.0;
        if (auto* g = std::get_if<GaussianSmoother>(&o.smoother)) {
            a = g->alpha;
            b = g->beta;
        }
        for (int n = 0; n < levels; ++n)
            table += join_csv({std::to_string(k), fmt(o.sigma), fmt(a), fmt(b), std::to_string(n),
                               fmt(rep.spectra[k][n])});
    }
    c.emit_text("gauge.csv", table);
    c.emit_json("gauge.json", {{"orderings", rep.orderings.size()},
                               {"levels", levels},
                               {"max_deviation", rep.max_deviation},
                               {"consistent", rep.consistent}});
    *c.log << "max deviation across orderings: " << fmt(rep.max_deviation)
           << (rep.consistent ? " (consistent)" : " (NOT consistent)") << "\n";
}

namespace {

EvolutionMethod method_of(const std::string& m) {
    if (m == "split_step") return EvolutionMethod::split_step_schrodinger;
    if (m == "matrix_exponential") return EvolutionMethod::matrix_exponential;
    if (m == "phase_space_rk4") return EvolutionMethod::phase_space_rk4;
    return EvolutionMethod::star_exponential;
}

ObservableSpec observable_of(const std::string& name, const PolyH& H) {
    if (name == "x") return PolyH::x();
    if (name == "p") return PolyH::p();
    if (name == "x2") return PolyH::monomial(2, 0);
    if (name == "p2") return PolyH::monomial(0, 2);
    return H;
}

WaveFunction gaussian_packet(const Axis& ax, double hbar, double x0, double p0, double width) {
    double norm = std::pow(2 * pi * width * width, -0.25);
    return WaveFunction::sample(ax, hbar, [&](double x) {
        double u = x - x0;
        return norm * std::exp(cplx(-u * u / (4 * width * width), p0 * x / hbar));
    });
}

} // namespace

void run_evolve(const Context& c) {
    const json& p = c.params;
    const double hbar = c.grid.hbar;
    std::string model = text(p, "model", "free");
    std::string method = text(p, "method", "split_step");
    double omega = num(p, "omega", 1.0);

    PolyH H;
    WaveFunction phi0;
    if (model == "free") {
        if (p.contains("hamiltonian")) throw InvalidArgument("evolve: hamiltonian is only used by model \"custom\"");
        H = PolyH::monomial(0, 2, 0, 0.5);
        FreeGaussianParams fp{num(p, "p0", 1.0), num(p, "delta_p", 0.5), c.spec.sigma};
        phi0 = free_gaussian_wave(fp, 0.0, c.grid.x, hbar);
    } else if (model == "oscillator") {
        if (p.contains("hamiltonian")) throw InvalidArgument("evolve: hamiltonian is only used by model \"custom\"");
        H = oscillator_hamiltonian(omega);
        phi0 = gaussian_packet(c.grid.x, hbar, num(p, "x_bar", 1.0), num(p, "p_bar", 0.0), std::sqrt(hbar / (2 * omega)));
    } else {
        if (!p.contains("hamiltonian")) throw InvalidArgument("evolve: model \"custom\" needs a hamiltonian");
        H = parse_named(p["hamiltonian"].get<std::string>(), "hamiltonian");
        phi0 = gaussian_packet(c.grid.x, hbar, num(p, "x0", 0.0), num(p, "p0", 1.0),
                               num(p, "width", std::sqrt(0.5)));
    }

    EvolutionConfig cfg;
    cfg.dt = num(p, "dt", 0.01);
    cfg.steps = integer(p, "steps", 100);
    cfg.method = method_of(method);
    cfg.order = integer(p, "order", 12);
    cfg.classical = flag(p, "classical", false);
    int record_every = integer(p, "record_every", 1);
    int snapshot_every = integer(p, "snapshot_every", 0);
    if (snapshot_every % record_every != 0)
        throw InvalidArgument("evolve: snapshot_every must be a multiple of record_every");
    cfg.snapshot_every = record_every;
    std::vector<std::string> names =
        p.value("observables", std::vector<std::string>{"x", "p", "x2", "p2", "H"});
    for (const auto& n : names) cfg.observables.push_back({n, observable_of(n, H)});

    bool schrodinger = cfg.method == EvolutionMethod::split_step_schrodinger ||
                       cfg.method == EvolutionMethod::matrix_exponential;
    if (schrodinger && cfg.classical) throw InvalidArgument("evolve: classical needs method phase_space_rk4");
    EvolutionResult r;
    if (schrodinger) {
        cfg.tensor_snapshots = false;
        r = evolve_schrodinger(phi0, H, c.spec, cfg);
    } else {
        r = evolve_phase_space(twisted_tensor(phi0, phi0, c.spec, c.grid), H, cfg);
    }

    auto has = [&](const std::string& n) { return std::find(names.begin(), names.end(), n) != names.end(); };
    std::vector<std::string> head{"t"};
    for (const auto& n : names) {
        head.push_back("re_" + n);
        head.push_back("im_" + n);
    }
    bool dx = has("x") && has("x2"), dp = has("p") && has("p2");
    if (dx) head.push_back("delta_x");
    if (dp) head.push_back("delta_p");
    head.push_back("norm");
    head.push_back("mass");
    FreeGaussianParams fp{num(p, "p0", 1.0), num(p, "delta_p", 0.5), c.spec.sigma};
    CoherentParams cp{num(p, "x_bar", 1.0), num(p, "p_bar", 0.0), omega, c.spec.sigma};
    if (model == "free") {
        head.push_back("x_exact");
        head.push_back("delta_x_exact");
    } else if (model == "oscillator") {
        head.push_back("x_exact");
        head.push_back("p_exact");
    }

    std::string table = join_csv(head);
    const double step_dt = cfg.dt;
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        const double t = r.times[k];
        const auto& e = r.expectations[k];
        std::vector<std::string> row{fmt(t)};
        for (const auto& n : names) {
            row.push_back(fmt(e.at(n).real()));
            row.push_back(fmt(e.at(n).imag()));
        }
        if (dx) row.push_back(fmt(std::sqrt(std::max(0.0, e.at("x2").real() - std::pow(e.at("x").real(), 2)))));
        if (dp) row.push_back(fmt(std::sqrt(std::max(0.0, e.at("p2").real() - std::pow(e.at("p").real(), 2)))));
        row.push_back(fmt(r.norms[k]));
        row.push_back(fmt(r.masses[k]));
        if (model == "free") {
            double sx = fp.delta_x(hbar);
            row.push_back(fmt(fp.p0 * t));
            row.push_back(fmt(std::sqrt(sx * sx + fp.delta_p * fp.delta_p * t * t)));
        } else if (model == "oscillator") {
            row.push_back(fmt(coherent_center_x(cp, t)));
            row.push_back(fmt(coherent_center_p(cp, t)));
        }
        table += join_csv(row);

        int step = static_cast<int>(std::lround(t / step_dt));
        bool snap = step == 0 || step == cfg.steps || (snapshot_every > 0 && step % snapshot_every == 0);
        if (snap && (c.csv || c.bin || c.dat)) {
            char stem[32];
            std::snprintf(stem, sizeof stem, "snapshot_%07d", step);
            if (schrodinger) c.emit_quasi(stem, twisted_tensor(r.wavefunctions[k], r.wavefunctions[k], c.spec, c.grid));
            else c.emit_quasi(stem, r.snapshots[k]);
        }
    }
    c.emit_text("trajectory.csv", table);
    if (!schrodinger) c.emit_json("evolution.json", {{"stability_bound", r.stability_bound}});
    *c.log << "evolved " << cfg.steps << " steps to t = " << fmt(r.times.back()) << " (" << r.times.size()
           << " trajectory rows)\n";
}

void run_oracle(const Context& c) {
    const json& p = c.params;
    std::string state = p.at("state").get<std::string>();
    OscillatorParams op{num(p, "omega", 1.0), c.spec.sigma, c.alpha, c.beta};
    int m = integer(p, "m", 0), n = integer(p, "n", 0);
    json report{{"state", state}};
    QuasiDistribution q;
    if (state == "free_gaussian") {
        q = free_gaussian({num(p, "p0", 0.0), num(p, "delta_p", 1.0), c.spec.sigma}, num(p, "t", 0.0), c.grid);
    } else if (state == "ho_ground") {
        q = ho_ground(op, c.grid);
        report["energy"] = op.energy(0, c.grid.hbar);
    } else if (state == "ho_state" || state == "ho_ladder") {
        q = state == "ho_state" ? ho_state(m, n, op, c.grid) : ho_ladder(m, n, op, c.grid);
        if (m == n) report["energy"] = op.energy(n, c.grid.hbar);
    } else if (state == "coherent") {
        CoherentResult cr = coherent_state({num(p, "x_bar", 0.0), num(p, "p_bar", 0.0), op.omega, c.spec.sigma}, c.grid);
        q = cr.state;
        report["left_residual"] = cr.left_residual;
        report["right_residual"] = cr.right_residual;
    } else {
        q = smoothed_plane_wave(num(p, "p0", 0.0), c.beta, c.grid);
    }
    report["mass"] = mass_of(q.psi_field);
    report["normalized"] = q.normalized;
    c.emit_quasi("state", q);
    c.emit_json("report.json", report);
    *c.log << state << ": mass " << fmt(report["mass"].get<double>()) << "\n";
}

namespace {

WaveFunction wave_of(const json& w, const Axis& ax, double hbar) {
    if (w.at("kind").get<std::string>() == "hermite")
        return hermite_basis_function(ax, hbar, integer(w, "n", 0), num(w, "omega", 1.0));
    return gaussian_packet(ax, hbar, num(w, "x0", 0.0), num(w, "p0", 0.0), num(w, "width", std::sqrt(0.5)));
}

std::string marginal_csv(const char* axis, const Axis& ax, const std::vector<double>& v) {
    std::string s = join_csv({axis, "density"});
    for (std::size_t i = 0; i < v.size(); ++i) s += join_csv({fmt(ax.point(i)), fmt(v[i])});
    return s;
}

} // namespace

void run_wigner(const Context& c) {
    const json& p = c.params;
    WaveFunction phi = wave_of(p.at("phi"), c.grid.x, c.grid.hbar);
    WaveFunction psi = p.contains("psi") ? wave_of(p["psi"], c.grid.x, c.grid.hbar) : phi;
    QuasiDistribution q = twisted_tensor(phi, psi, c.spec, c.grid);
    c.emit_quasi("state", q);
    json report{{"mass", mass_of(q.psi_field)}, {"normalized", q.normalized}};
    if (flag(p, "marginals", true)) {
        c.emit_text("marginal_x.csv", marginal_csv("x", c.grid.x, marginal(q, MarginalAxis::x)));
        c.emit_text("marginal_p.csv", marginal_csv("p", c.grid.p, marginal(q, MarginalAxis::p)));
    }
    if (flag(p, "purity", true)) {
        PurityReport pr = purity_check(q);
        report["purity"] = {{"is_pure", pr.is_pure},
                            {"hermiticity", pr.hermiticity},
                            {"idempotence", pr.idempotence},
                            {"normalization", pr.normalization}};
    }
    c.emit_json("report.json", report);
    *c.log << "tensor on " << c.grid.nx() << "x" << c.grid.np() << ": mass " << fmt(report["mass"].get<double>())
           << "\n";
}

namespace {

PhaseField field_source(const Context& c, const json& s, unsigned stream) {
    std::string kind = s.at("kind").get<std::string>();
    if (kind == "mixture") return random_mixture(c.grid, c.seed, stream, integer(s, "terms", 3));
    if (kind == "gaussian") {
        double x0 = num(s, "x0", 0.0), p0 = num(s, "p0", 0.0), w = num(s, "width", 1.0);
        return PhaseField::sample(c.grid, [&](double x, double p) {
            return std::exp(-((x - x0) * (x - x0) + (p - p0) * (p - p0)) / (2 * w * w));
        });
    }
    if (kind == "polynomial") {
        if (!s.contains("expression")) throw InvalidArgument("field source \"polynomial\" needs an expression");
        return sample_polynomial(parse_named(s["expression"].get<std::string>(), "expression"), c.grid);
    }
    if (!s.contains("path")) throw InvalidArgument("field source \"file\" needs a path");
    return load_field(s["path"].get<std::string>());
}

} // namespace

void run_starprod(const Context& c) {
    const json& p = c.params;
    std::string op = p.at("operation").get<std::string>();
    PhaseField f = field_source(c, p.at("f"), 0);
    bool binary = op == "star" || op == "commutator" || op == "moyal_bracket" || op == "poisson_bracket";
    if (binary && !p.contains("g")) throw InvalidArgument("starprod: operation \"" + op + "\" needs g");
    if (!binary && p.contains("g")) throw InvalidArgument("starprod: operation \"" + op + "\" takes no g");
    PhaseField g = binary ? field_source(c, p["g"], 1) : PhaseField();
    if (binary) require_same_grid(f, g, "starprod");

    StarOptions opts;
    opts.zero_pad = flag(p, "zero_pad", false);
    json report{{"operation", op}, {"tail_f", tail_mass(f)}};
    PhaseField out;
    if (op == "star") {
        StarReport sr;
        out = star_sigma_S(f, g, c.spec, opts, &sr);
        report["tail_g"] = sr.tail_g;
        report["tail_warning"] = sr.tail_warning;
    } else if (op == "commutator") {
        out = star_commutator(f, g, c.spec);
    } else if (op == "moyal_bracket") {
        out = moyal_bracket(f, g, c.spec);
    } else if (op == "poisson_bracket") {
        out = poisson_bracket(f, g);
    } else if (op == "bopp_left" || op == "bopp_right") {
        if (!p.contains("observable")) throw InvalidArgument("starprod: operation \"" + op + "\" needs an observable");
        ObservableSpec A(parse_named(p["observable"].get<std::string>(), "observable"));
        out = bopp_apply(A, f, op == "bopp_left" ? Side::left : Side::right, c.spec);
    } else if (op == "dagger") {
        out = involution_dagger(f, c.spec);
    } else {
        out = gauge_transform(f, c.spec.sigma, num(p, "sigma_to", 0.5));
    }
    if (binary && !report.contains("tail_g")) report["tail_g"] = tail_mass(g);
    c.emit_field("result", out);
    c.emit_json("report.json", report);
    *c.log << op << ": result L2 norm " << fmt(l2_norm(out)) << "\n";
}

void run_symbolic(const Context& c) {
    const json& p = c.params;
    std::string op = p.at("operation").get<std::string>();
    PolyH f = parse_named(p.at("f").get<std::string>(), "f");
    bool binary = op == "pstar" || op == "bracket" || op == "poisson";
    if (binary && !p.contains("g")) throw InvalidArgument("symbolic: operation \"" + op + "\" needs g");
    if (!binary && p.contains("g")) throw InvalidArgument("symbolic: operation \"" + op + "\" takes no g");
    PolyH g = binary ? parse_named(p["g"].get<std::string>(), "g") : PolyH();
    DiffOpWord S = *word_of(c);
    const double sigma = c.spec.sigma;
    // Product of the (sigma, S) family: S(S^{-1}f *_sigma S^{-1}g).
    auto star = [&](const PolyH& a, const PolyH& b) {
        return apply_word(S, pstar(apply_word(S, a, true), apply_word(S, b, true), sigma));
    };
    std::string result;
    if (op == "pstar") {
        result = star(f, g).str();
    } else if (op == "bracket") {
        result = (PolyH::monomial(0, 0, -1, cplx(0.0, -1.0)) * (star(f, g) - star(g, f))).str();
    } else if (op == "poisson") {
        result = ppoisson(f, g).str();
    } else if (op == "order") {
        result = sigma_S_order(f, sigma, S).str();
    } else if (op == "smooth") {
        result = apply_word(S, f, true).str();
    } else {
        result = apply_word(DiffOpWord::gauge(num(p, "delta", 0.0)), f).str();
    }
    c.emit_text("symbolic.txt", result + "\n");
    json j{{"operation", op}, {"f", p["f"]}, {"sigma", sigma}, {"alpha", c.alpha}, {"beta", c.beta}, {"result", result}};
    if (binary) j["g"] = p["g"];
    c.emit_json("symbolic.json", j);
    *c.log << result << "\n";
}

void run_classical_limit(const Context& c) {
    const json& p = c.params;
    std::string family = text(p, "family", "free");
    std::vector<double> hbars = p.value("hbars", std::vector<double>{0.2, 0.1, 0.05, 0.025});
    std::vector<double> center = p.value("test_center", std::vector<double>{0.0, 0.0});
    double w = num(p, "test_width", 1.0);
    auto testfn = [&](double x, double q) {
        double u = x - center[0], v = q - center[1];
        return std::exp(-(u * u + v * v) / (2 * w * w));
    };
    double t = num(p, "t", 1.0), p0 = num(p, "p0", 0.8), omega = num(p, "omega", 1.0);
    double xb = num(p, "x_bar", 0.5), pb = num(p, "p_bar", -0.4);
    int n = integer(p, "n", 2);
    const std::size_t nx = c.grid.nx(), np = c.grid.np();
    const double sigma = c.spec.sigma;

    double xc = 0.0, pc = 0.0;
    std::function<QuasiDistribution(double)> make;
    if (family == "free") {
        xc = p0 * t;
        pc = p0;
        double dp_units = num(p, "delta_p", 1.0);
        make = [=](double h) {
            FreeGaussianParams fp{p0, dp_units * std::sqrt(h), sigma};
            double sx = std::sqrt(std::pow(fp.delta_x(h), 2) + fp.delta_p * fp.delta_p * t * t);
            return free_gaussian(fp, t, make_grid(nx, np, xc - 10 * sx, xc + 10 * sx, p0 - 10 * fp.delta_p,
                                                  p0 + 10 * fp.delta_p, h));
        };
    } else if (family == "stationary") {
        OscillatorParams op{omega, sigma, c.alpha, c.beta};
        make = [=](double h) {
            double r = (8 + std::sqrt(2.0 * n + 1)) * std::sqrt(h);
            double rx = r / std::sqrt(omega), rp = r * std::sqrt(omega);
            return ho_state(n, n, op, make_grid(nx, np, -rx, rx, -rp, rp, h));
        };
    } else {
        xc = xb;
        pc = pb;
        make = [=](double h) {
            double r = 8 * std::sqrt(h);
            double rx = r / std::sqrt(omega), rp = r * std::sqrt(omega);
            return coherent_state({xb, pb, omega, sigma}, make_grid(nx, np, xb - rx, xb + rx, pb - rp, pb + rp, h))
                .state;
        };
    }
    std::vector<cplx> vals = classical_limit_probe(make, testfn, hbars);
    double target = testfn(xc, pc);
    std::string table = join_csv({"hbar", "pairing_re", "pairing_im", "target", "error"});
    std::vector<double> err;
    for (std::size_t k = 0; k < hbars.size(); ++k) {
        err.push_back(std::abs(vals[k] - target));
        table += join_csv({fmt(hbars[k]), fmt(vals[k].real()), fmt(vals[k].imag()), fmt(target), fmt(err.back())});
    }
    bool monotone = true;
    for (std::size_t k = 1; k < err.size(); ++k)
        if (hbars[k] < hbars[k - 1]) monotone = monotone && err[k] < err[k - 1];
    c.emit_text("limit.csv", table);
    c.emit_json("report.json", {{"family", family},
                                {"classical_point", {xc, pc}},
                                {"target", target},
                                {"monotone_decrease", monotone}});
    *c.log << family << ": error at smallest hbar " << fmt(err.back())
           << (monotone ? " (monotone)" : " (not monotone)") << "\n";
}

} // namespace psq::cli
