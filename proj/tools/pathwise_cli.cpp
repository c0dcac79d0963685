#include "pathwise/config.hpp"
#include "pathwise/errors.hpp"
#include "pathwise/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Pathwise experiment runner"};
    std::string config_file;
    std::string output;
    unsigned threads = 1;
    bool verbose = false;
    app.add_option("--config", config_file, "experiment configuration (YAML)")->required()->check(CLI::ExistingFile);
    app.add_option("--output", output, "output directory, overrides the config's `output`");
    app.add_option("--threads", threads, "worker threads (results do not depend on it)")
        ->check(CLI::Range(1u, 1024u));
    app.add_flag("--verbose", verbose, "progress lines on stderr");
    app.set_version_flag("--version", pathwise::library_version());
    CLI11_PARSE(app, argc, argv);

    pathwise::ExperimentConfig config;
    try {
        config = pathwise::load_config(config_file);
    } catch (const pathwise::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }

    pathwise::RunOptions options;
    options.output_dir = output;
    options.threads = threads;
    if (verbose) options.log = &std::cerr;
    const pathwise::RunResult result = pathwise::run_experiment(config, options);
    (result.exit_code == 0 ? std::cout : std::cerr) << result.message << '\n';
    return result.exit_code;
}
