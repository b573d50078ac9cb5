#include "artifacts.hpp"
#include "runner.hpp"

#include "psq/field_io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

using psq::cli::json;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep)) out.push_back(item);
    return out;
}

json number_or_text(const std::string& s) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    return s;
}

// A flag that lands at json pointer `ptr` of the config, only when given.
struct Binding {
    std::string ptr;
    std::function<json()> value;
    CLI::Option* opt;
};

class Builder {
public:
    explicit Builder(CLI::App* app) : app_(app) {}

    template <class T>
    void add(const std::string& flags, const std::string& ptr, const std::string& help) {
        auto holder = std::make_shared<T>();
        CLI::Option* o = app_->add_option(flags, *holder, help);
        bindings_.push_back({ptr, [holder] { return json(*holder); }, o});
    }
    void add_flag(const std::string& flags, const std::string& ptr, bool value, const std::string& help) {
        CLI::Option* o = app_->add_flag(flags, help);
        bindings_.push_back({ptr, [value] { return json(value); }, o});
    }
    // Comma-separated list of numbers or words.
    void add_list(const std::string& flags, const std::string& ptr, const std::string& help) {
        auto holder = std::make_shared<std::string>();
        CLI::Option* o = app_->add_option(flags, *holder, help);
        bindings_.push_back({ptr, [holder] {
                                 json a = json::array();
                                 for (const auto& s : split(*holder, ',')) a.push_back(number_or_text(s));
                                 return a;
                             },
                             o});
    }
    void add_custom(const std::string& flags, const std::string& ptr, const std::string& help,
                    std::function<json(const std::string&)> conv) {
        auto holder = std::make_shared<std::string>();
        CLI::Option* o = app_->add_option(flags, *holder, help);
        bindings_.push_back({ptr, [holder, conv] { return conv(*holder); }, o});
    }

    void apply(json& config) const {
        for (const auto& b : bindings_)
            if (b.opt->count() > 0) config[json::json_pointer(b.ptr)] = b.value();
    }

    CLI::App* app() const { return app_; }

private:
    CLI::App* app_;
    std::vector<Binding> bindings_;
};

void add_common(Builder& b) {
    b.add<std::string>("--out,-o", "/output/directory", "output directory");
    b.add_list("--formats", "/output/formats", "field formats, subset of csv,bin,dat");
    b.add<int>("--nx", "/grid/nx", "x samples (power of two)");
    b.add<int>("--np", "/grid/np", "p samples (power of two)");
    b.add_custom("--span", "/grid/x_span", "half width L: x in [-L, L) (and p, unless --p-span)",
                 [](const std::string& s) { double L = std::stod(s); return json::array({-L, L}); });
    b.add_custom("--p-span", "/grid/p_span", "half width of the p axis",
                 [](const std::string& s) { double L = std::stod(s); return json::array({-L, L}); });
    b.add<double>("--hbar", "/grid/hbar", "Planck constant");
    b.add<double>("--sigma", "/ordering/sigma", "ordering parameter in [0, 1]");
    b.add<double>("--alpha", "/ordering/alpha", "Gaussian smoother alpha");
    b.add<double>("--beta", "/ordering/beta", "Gaussian smoother beta");
    b.add<std::uint64_t>("--seed", "/seed", "random seed");
}

// "hermite:N[:OMEGA]" or "gaussian:X0:P0:WIDTH"
json wave_spec(const std::string& s) {
    auto parts = split(s, ':');
    json w;
    if (!parts.empty()) w["kind"] = parts[0];
    if (!parts.empty() && parts[0] == "hermite") {
        if (parts.size() > 1) w["n"] = std::stoi(parts[1]);
        if (parts.size() > 2) w["omega"] = std::stod(parts[2]);
    } else {
        const char* keys[] = {"x0", "p0", "width"};
        for (std::size_t i = 1; i < parts.size() && i < 4; ++i) w[keys[i - 1]] = std::stod(parts[i]);
    }
    return w;
}

// "mixture[:TERMS]", "gaussian:X0:P0:WIDTH", "poly:EXPR", "file:PATH", or with
// --symbolic a bare polynomial.
json field_spec(const std::string& s) {
    auto colon = s.find(':');
    std::string kind = s.substr(0, colon);
    std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);
    if (kind == "poly") return {{"kind", "polynomial"}, {"expression", rest}};
    if (kind == "file") return {{"kind", "file"}, {"path", rest}};
    json f{{"kind", kind}};
    if (kind == "mixture" && !rest.empty()) f["terms"] = std::stoi(rest);
    if (kind == "gaussian") {
        auto parts = split(rest, ':');
        const char* keys[] = {"x0", "p0", "width"};
        for (std::size_t i = 0; i < parts.size() && i < 3; ++i) f[keys[i]] = std::stod(parts[i]);
    }
    return f;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"phase-space quantization toolkit: star products, quasi-distributions, spectra, dynamics"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version",
                         std::string("psq ") + PSQ_VERSION + " (field format " +
                             std::to_string(psq::field_format_version) + ", manifest format " +
                             std::to_string(psq::cli::manifest_format_version) + ")");
    bool print_config = false;
    app.add_flag("--print-config", print_config, "print the config built from the flags instead of running");

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "run a JSON scenario config");
    run->add_option("config", config_path, "config file")->required();

    std::vector<std::pair<std::string, Builder>> subs;
    auto sub = [&](const std::string& name, const std::string& help) -> Builder& {
        subs.emplace_back(name, Builder(app.add_subcommand(name, help)));
        add_common(subs.back().second);
        return subs.back().second;
    };
    subs.reserve(8);

    Builder& spectrum = sub("spectrum", "eigenvalues and star-genvalue residuals of a Hamiltonian");
    spectrum.add<std::string>("--hamiltonian,-H", "/params/hamiltonian", "polynomial, e.g. \"1/2*p^2 + 1/2*x^2\"");
    spectrum.add<int>("--levels", "/params/levels", "number of levels");
    spectrum.add_flag("--no-residuals", "/params/residuals", false, "skip the phase-space residuals");
    spectrum.add_flag("--eigenfields", "/params/eigenfields", true, "emit the diagonal eigenfields");

    Builder& gauge = sub("gauge-check", "spectra of one Hamiltonian across orderings");
    gauge.add<std::string>("--hamiltonian,-H", "/params/hamiltonian", "polynomial Hamiltonian");
    gauge.add<int>("--levels", "/params/levels", "number of levels");
    gauge.add_list("--sigmas", "/params/sigmas", "comma-separated sigma values");
    gauge.add_custom("--smoothers", "/params/smoothers", "comma-separated alpha:beta pairs",
                     [](const std::string& s) {
                         json a = json::array();
                         for (const auto& item : split(s, ',')) {
                             auto ab = split(item, ':');
                             a.push_back({{"alpha", std::stod(ab.at(0))}, {"beta", std::stod(ab.at(1))}});
                         }
                         return a;
                     });

    Builder& evolve = sub("evolve", "time evolution with expectation trajectories and snapshots");
    evolve.add<std::string>("--scenario", "/params/model", "free, oscillator or custom");
    evolve.add<std::string>("--method", "/params/method",
                            "split_step, matrix_exponential, phase_space_rk4 or star_exponential");
    evolve.add<double>("--dt", "/params/dt", "time step");
    evolve.add<int>("--steps", "/params/steps", "number of steps");
    evolve.add<int>("--record-every", "/params/record_every", "steps between trajectory rows");
    evolve.add<int>("--snapshot-every", "/params/snapshot_every", "steps between snapshots (0: first and last)");
    evolve.add<int>("--order", "/params/order", "series order for star_exponential");
    evolve.add_flag("--classical", "/params/classical", true, "Liouville flow (phase_space_rk4)");
    evolve.add_list("--observables", "/params/observables", "subset of x,p,x2,p2,H");
    evolve.add<std::string>("--hamiltonian,-H", "/params/hamiltonian", "custom model Hamiltonian");
    evolve.add<double>("--omega", "/params/omega", "oscillator frequency");
    evolve.add<double>("--p0", "/params/p0", "mean momentum (free, custom)");
    evolve.add<double>("--delta-p", "/params/delta_p", "momentum spread (free)");
    evolve.add<double>("--x-bar", "/params/x_bar", "initial center x (oscillator)");
    evolve.add<double>("--p-bar", "/params/p_bar", "initial center p (oscillator)");
    evolve.add<double>("--x0", "/params/x0", "initial center (custom)");
    evolve.add<double>("--width", "/params/width", "initial position spread (custom)");

    Builder& oracle = sub("oracle", "closed-form free-particle and oscillator states");
    oracle.add<std::string>("--state", "/params/state",
                            "free_gaussian, ho_ground, ho_state, ho_ladder, coherent or smoothed_plane_wave");
    oracle.add<double>("--t", "/params/t", "time (free_gaussian)");
    oracle.add<double>("--p0", "/params/p0", "mean momentum");
    oracle.add<double>("--delta-p", "/params/delta_p", "momentum spread");
    oracle.add<double>("--omega", "/params/omega", "oscillator frequency");
    oracle.add<int>("--m", "/params/m", "left level");
    oracle.add<int>("--n", "/params/n", "right level");
    oracle.add<double>("--x-bar", "/params/x_bar", "coherent center x");
    oracle.add<double>("--p-bar", "/params/p_bar", "coherent center p");

    Builder& wigner = sub("wigner", "twisted tensor of two wavefunctions");
    wigner.add_custom("--phi", "/params/phi", "hermite:N[:OMEGA] or gaussian:X0:P0:WIDTH", wave_spec);
    wigner.add_custom("--psi", "/params/psi", "second wavefunction (default: phi)", wave_spec);
    wigner.add_flag("--no-marginals", "/params/marginals", false, "skip the marginals");
    wigner.add_flag("--no-purity", "/params/purity", false, "skip the purity check");

    Builder& starprod = sub("starprod", "numerical star products, brackets and Bopp actions");
    bool symbolic_flag = false;
    starprod.app()->add_flag("--symbolic", symbolic_flag, "exact polynomial calculus (same as `symbolic`)");
    starprod.add<std::string>("--operation", "/params/operation",
                              "star, commutator, moyal_bracket, poisson_bracket, bopp_left, bopp_right, dagger, "
                              "gauge; with --symbolic: pstar, bracket, poisson, order, smooth, gauge");
    starprod.add<std::string>("--f", "/params/f",
                              "mixture[:TERMS], gaussian:X0:P0:W, poly:EXPR or file:PATH; polynomial with --symbolic");
    starprod.add<std::string>("--g", "/params/g", "second operand");
    starprod.add<std::string>("--observable", "/params/observable", "polynomial for bopp_left/bopp_right");
    starprod.add<double>("--sigma-to", "/params/sigma_to", "target sigma for gauge");
    starprod.add<double>("--delta", "/params/delta", "gauge shift with --symbolic");
    starprod.add_flag("--zero-pad", "/params/zero_pad", true, "evaluate on a zero-padded grid");

    Builder& symbolic = sub("symbolic", "exact polynomial star calculus");
    symbolic.add<std::string>("--operation", "/params/operation", "pstar, bracket, poisson, order, smooth or gauge");
    symbolic.add<std::string>("--f", "/params/f", "polynomial");
    symbolic.add<std::string>("--g", "/params/g", "polynomial");
    symbolic.add<double>("--delta", "/params/delta", "gauge shift");

    Builder& limit = sub("classical-limit", "pairings with a test function as hbar decreases");
    limit.add<std::string>("--family", "/params/family", "free, stationary or coherent");
    limit.add_list("--hbars", "/params/hbars", "comma-separated hbar values");
    limit.add<double>("--t", "/params/t", "time (free)");
    limit.add<double>("--p0", "/params/p0", "momentum (free)");
    limit.add<int>("--n", "/params/n", "level (stationary)");
    limit.add<double>("--x-bar", "/params/x_bar", "center x (coherent)");
    limit.add<double>("--p-bar", "/params/p_bar", "center p (coherent)");
    limit.add<double>("--omega", "/params/omega", "oscillator frequency");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : psq::cli::exit_config;
    }

    if (run->parsed()) return psq::cli::run_config_file(config_path, std::cout, std::cerr);

    for (auto& [name, b] : subs) {
        if (!b.app()->parsed()) continue;
        json config{{"scenario", name}, {"output", {{"directory", "psq-" + name}}}};
        try {
            b.apply(config);
        } catch (const std::exception& e) {
            std::cerr << "psq: error: bad flag value: " << e.what() << "\n";
            return psq::cli::exit_config;
        }
        if (name == "starprod" && symbolic_flag) {
            config["scenario"] = "symbolic";
            config["output"]["directory"] = config["output"]["directory"] == "psq-starprod"
                                                ? json("psq-symbolic")
                                                : config["output"]["directory"];
        } else if (name == "starprod") {
            for (const char* k : {"f", "g"})
                if (config["params"].contains(k)) config["params"][k] = field_spec(config["params"][k]);
        }
        if (print_config) {
            std::cout << config.dump(2) << "\n";
            return 0;
        }
        return psq::cli::run_config(config, std::cout, std::cerr);
    }
    return psq::cli::exit_internal;
}
