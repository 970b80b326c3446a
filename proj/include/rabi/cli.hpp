// cli.hpp: command-line front end of the rabi lab.
//
//     rabi_lab <command> [--flag value ...] [--config file.json] [--out file.csv]
//
// Commands: floquet, resonances, curves, dynamics, oracle, compare. A config
// file is a flat JSON object whose keys are the flag names without dashes
// prefix (e.g. "mu", "t-end", "mu-grid"); flags override it. Unknown keys and
// flags a command does not use are rejected.
//
// Failures print one line "error: <Name>: <message>" on stderr; the exit
// status is 1 for invalid input and 2 for numerical failures.

#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace rabi::cli {

struct RunConfig {
    std::string command;
    std::map<std::string, std::string> parameters;  // flag name (no dashes) -> value text
    std::string output_path;                        // empty: CSV on stdout, no sidecar
};

// Keys accepted by a command (without "out" and "config").
const std::vector<std::string>& allowed_keys(const std::string& command);

// args excludes the program name. Throws ValidationError.
RunConfig parse_arguments(const std::vector<std::string>& args);

// Executes the command and writes its artifacts; throws rabi::Error.
void run(const RunConfig& config, std::ostream& out);

// Full entry point with error reporting; returns the process exit status.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rabi::cli
