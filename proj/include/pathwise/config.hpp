#pragma once

#include "pathwise/families.hpp"
#include "pathwise/refsolver.hpp"
#include "pathwise/taylor.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pathwise {

struct FamilySpec {
    std::string family;
    Params params;
    bool operator==(const FamilySpec&) const = default;
};

struct PathSpec {
    double horizon = 1.0;
    std::size_t steps = 1024;
    std::size_t refine = 1;  ///< bridge refinement factor applied after sampling
    bool operator==(const PathSpec&) const = default;
};

struct LatticeSpec {
    int finest = 16;  ///< smallest delta is 2^-finest
    int coarsest = 8;
    Pairing pairing = Pairing::matched;
    std::vector<double> multipliers{-2.0, -1.0, 0.0, 1.0, 2.0};
    std::vector<double> offsets;  ///< h values for the product pairing
    bool operator==(const LatticeSpec&) const = default;
};

struct GridSpec {
    double x_lo = -8.0;
    double x_hi = 8.0;
    std::size_t nx = 401;
    Boundary boundary = Boundary::dirichlet;
    std::size_t store_every = 1;
    bool operator==(const GridSpec&) const = default;
};

/// Either `count` random points in the (t, x) box (times snapped to the path grid) or an explicit list.
struct PointsSpec {
    std::size_t count = 0;
    std::pair<double, double> t_range{0.25, 1.0};
    std::pair<double, double> x_range{-2.0, 2.0};
    std::vector<std::pair<double, double>> list;
    bool operator==(const PointsSpec&) const = default;
};

struct MonteCarloSpec {
    std::size_t samples = 10000;
    std::size_t inner_steps = 50;
    bool operator==(const MonteCarloSpec&) const = default;
};

struct EvaluateSpec {
    double t = 0.5;
    std::vector<double> xs;
    bool operator==(const EvaluateSpec&) const = default;
};

struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 0;
    std::size_t seeds = 1;  ///< paths use seeds seed, seed + 1, ..., seed + seeds - 1
    std::size_t noise_dim = 1;
    std::size_t space_dim = 1;
    std::optional<PathSpec> path;
    std::optional<FamilySpec> f;
    std::optional<FamilySpec> g;
    std::optional<FamilySpec> field;
    std::optional<FamilySpec> reference_field;
    std::optional<FamilySpec> initial;
    std::optional<FamilySpec> comparison_initial;
    std::optional<LatticeSpec> lattice;
    std::optional<GridSpec> grid;
    std::optional<PointsSpec> points;
    std::optional<MonteCarloSpec> monte_carlo;
    std::optional<EvaluateSpec> evaluate;
    std::vector<double> eps;
    std::string scheme = "stratonovich";
    std::map<std::string, double> tolerances;  ///< filled with the experiment's defaults
    std::string output;

    bool operator==(const ExperimentConfig&) const = default;

    /// Tolerance by name; throws ConfigError for names the experiment does not define.
    double tolerance(const std::string& name) const;
};

std::vector<std::string> experiment_names();

/// Strict YAML parsing: unknown or duplicate keys, missing or unused blocks and type mismatches raise
/// ConfigError naming the key and line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& filename);

/// YAML text that parses back to an equal config.
std::string echo_config(const ExperimentConfig& config);

}  // namespace pathwise
