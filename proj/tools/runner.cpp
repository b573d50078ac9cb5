#include "runner.hpp"

#include "artifacts.hpp"
#include "scenarios.hpp"
#include "schema_check.hpp"

#include "psq/error.hpp"
#include "psq/field_io.hpp"

#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace psq::cli {

namespace {

using Runner = void (*)(const Context&);

const std::map<std::string, Runner>& runners() {
    static const std::map<std::string, Runner> m{
        {"spectrum", run_spectrum},   {"gauge-check", run_gauge_check}, {"evolve", run_evolve},
        {"oracle", run_oracle},       {"wigner", run_wigner},           {"starprod", run_starprod},
        {"symbolic", run_symbolic},   {"classical-limit", run_classical_limit},
    };
    return m;
}

int fail(std::ostream& err, int code, const std::string& msg) {
    err << "psq: error: " << msg << "\n";
    return code;
}

} // namespace

int run_config(const json& config, std::ostream& out, std::ostream& err) {
    try {
        auto problems = scenario_validator().validate(config);
        if (!problems.empty()) {
            for (const auto& p : problems) err << "psq: error: config" << p << "\n";
            return exit_config;
        }
        Context c = resolve_context(config);
        Staging stage(config["output"]["directory"].get<std::string>());
        std::ostringstream log;
        c.stage = &stage;
        c.log = &log;

        std::string scenario = config["scenario"].get<std::string>();
        std::string canonical = config.dump(2) + "\n";
        c.emit_text("config.json", canonical);
        runners().at(scenario)(c);

        json head{{"manifest_version", manifest_format_version},
                  {"psq_version", PSQ_VERSION},
                  {"field_format_version", field_format_version},
                  {"scenario", scenario},
                  {"config_sha256", sha256_hex(canonical)}};
        json manifest = stage.commit(head);
        out << log.str();
        out << "psq: " << scenario << ": wrote " << manifest["files"].size() << " files and manifest.json to "
            << stage.out_dir().string() << "\n";
        return exit_ok;
    } catch (const NumericalPrecondition& e) {
        return fail(err, exit_numerical, e.what());
    } catch (const IoError& e) {
        return fail(err, exit_io, e.what());
    } catch (const InvalidArgument& e) {
        return fail(err, exit_config, e.what());
    } catch (const Unsupported& e) {
        return fail(err, exit_config, e.what());
    } catch (const std::exception& e) {
        return fail(err, exit_internal, e.what());
    }
}

int run_config_file(const std::string& path, std::ostream& out, std::ostream& err) {
    std::ifstream in(path);
    if (!in) return fail(err, exit_io, "cannot read config " + path);
    json config;
    try {
        config = json::parse(in);
    } catch (const json::parse_error& e) {
        return fail(err, exit_config, path + ": " + e.what());
    }
    return run_config(config, out, err);
}

} // namespace psq::cli
