#pragma once

// nmrcage command-line front end.
//
// Every parameter is a named value in one JSON object (keys are the long
// flag names without dashes). A --config file supplies a base object, flags
// given on the command line replace individual entries, and the effective
// object is echoed into the output metadata in user units, so feeding a JSON
// output back in as --config reproduces it.

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace nmrcage::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitCompare = 3;

enum class Command { Fid, Spectrum, Mc };

/// Raised for invalid parameter combinations; what() is the one-line diagnostic.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Runs `command` with an already-merged parameter object. Output goes to the
/// file named by "out" or to `out` when that is "-" or absent. Returns an exit code.
int run(Command command, const nlohmann::ordered_json& params, std::ostream& out, std::ostream& err);

/// Full argv handling: subcommand, flags, --config merging.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace nmrcage::cli
