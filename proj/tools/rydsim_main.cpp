#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rydsim/scenario.hpp"

namespace {

void print_error_json(const char* type, const std::string& message) {
    std::string escaped;
    for (char c : message) {
        if (c == '"' || c == '\\') escaped += '\\';
        if (c == '\n') {
            escaped += "\\n";
            continue;
        }
        escaped += c;
    }
    std::fprintf(stderr, "{\"error\": {\"type\": \"%s\", \"message\": \"%s\"}}\n", type,
                 escaped.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-qubit Rydberg-blockade CPHASE gate simulation and pulse "
                 "optimization"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "execute a scenario config");
    std::string config_path;
    ryd::RunOptions opts;
    run->add_option("config", config_path, "scenario config or manifest.json")
        ->required();
    run->add_option("--set", opts.overrides, "override a config key (key.path=value)");
    run->add_option("--out", opts.output_dir, "output directory");
    run->add_option("--jobs", opts.jobs, "worker thread cap (0 = all cores)");
    run->add_option("--seed", opts.seed, "random seed override");

    CLI11_PARSE(app, argc, argv);

    try {
        std::string out = ryd::run_scenario(config_path, opts);
        std::printf("artifacts written to %s\n", out.c_str());
        return 0;
    } catch (const ryd::ConfigError& e) {
        print_error_json("config", e.what());
        return ryd::exit_config_error;
    } catch (const ryd::IoError& e) {
        print_error_json("io", e.what());
        return ryd::exit_io_error;
    } catch (const std::exception& e) {
        print_error_json("numerical", e.what());
        return ryd::exit_numerical_error;
    }
}
