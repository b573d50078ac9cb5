#pragma once

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace psq::cli {

using json = nlohmann::json;

enum ExitCode : int {
    exit_ok = 0,
    exit_internal = 1,
    exit_config = 2,     // schema violation, bad values, unsupported combinations
    exit_numerical = 3,  // numerical precondition; the message names the bound
    exit_io = 4,
};

// Validates the config against the scenario schema, runs the scenario and
// publishes its artifacts with manifest.json. Nothing is written unless the
// run succeeds. Never throws; errors go to `err` as one "psq: error: ..." line
// (schema violations one per line).
int run_config(const json& config, std::ostream& out, std::ostream& err);

// Reads a JSON config file, then run_config. Unreadable file: exit_io;
// unparsable JSON: exit_config.
int run_config_file(const std::string& path, std::ostream& out, std::ostream& err);

} // namespace psq::cli
