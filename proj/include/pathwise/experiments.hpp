#pragma once

#include "pathwise/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace pathwise {

struct RunOptions {
    std::string output_dir;  ///< overrides config.output when nonempty
    unsigned threads = 1;
    std::ostream* log = nullptr;  ///< progress lines when set
};

struct RunResult {
    int exit_code = 0;  ///< 0 pass, 2 experiment-level failure, 1 usage error
    std::string message;
    std::vector<std::string> artifacts;  ///< file names relative to the output directory
};

/// Runs one experiment, writing CSV artifacts and `metadata.json` into the output directory.
/// CSVs depend only on the config, never on the thread count or the clock.
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options);

/// Library version string baked in at build time.
const char* library_version();

}  // namespace pathwise
