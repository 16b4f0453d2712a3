#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ryd {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunOptions {
    std::vector<std::string> overrides;  // dotted key=value pairs
    std::string output_dir;              // overrides config output_dir
    int jobs = -1;                       // -1 = take from config
    long long seed = -1;                 // -1 = take from config
};

// Executes the scenario described by a JSON config (or a manifest.json from
// a previous run) and writes manifest.json plus kind-specific CSV/JSON
// artifacts into the output directory. Returns the output directory used.
std::string run_scenario(const std::string& config_path, const RunOptions& opts = {});

// exit codes for the CLI wrapper
inline constexpr int exit_config_error = 2;
inline constexpr int exit_numerical_error = 3;
inline constexpr int exit_io_error = 4;

inline constexpr const char* tool_version = "0.1.0";

}  // namespace ryd
