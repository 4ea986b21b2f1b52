#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ttree/estimators.hpp"
#include "ttree/synthetic.hpp"

namespace ttree {

/// Everything a command run needs, loadable from a flat key=value file and
/// overridable from command-line flags. One seed drives all randomness
/// through named substreams.
struct RunConfig {
    // Data source: a CSV path and/or a synthetic model ("default" for the
    // built-in benchmark model, "custom" for one described by the
    // dimension/subgroup/... keys below).
    std::optional<std::string> data_path;
    std::optional<std::string> synthetic;
    std::size_t samples = 1000;

    // Custom synthetic model description.
    std::size_t dimension = 2;
    double noise_sd = 0.1;
    double treatment_min = 0.0;
    double treatment_max = 10.0;
    double baseline_intercept = 0.0;
    std::vector<double> baseline_coefs;
    std::vector<std::string> subgroup_specs;   // e.g. "f0:[-inf,0.5) trigger:3 effect:1"

    // Column roles for CSV ingestion.
    std::vector<std::string> feature_columns;  // empty: every unclaimed column
    std::string treatment_column = "treatment";
    std::string outcome_column = "outcome";
    std::optional<std::string> true_effect_column;
    std::vector<std::string> discrete_columns;

    // Learning.
    CriterionConfig criterion;
    double validation_fraction = 0.5;          // rho
    double estimation_fraction = 0.0;
    double test_fraction = 0.0;
    std::size_t min_group_size = 5;
    std::optional<std::size_t> max_depth;
    double min_split_gain = 0.0;
    std::optional<double> alpha;               // pruning significance level
    std::uint64_t seed = 0;

    // Cross-validation tuning.
    std::vector<double> lambda_grid;
    std::vector<double> rho_grid;
    std::size_t folds = 5;

    // File plumbing.
    std::optional<std::string> tree_path;      // input tree
    std::optional<std::string> output_path;    // command artifact

    void validate() const;

    /// Materialize the synthetic model these keys describe. Throws
    /// ValidationError when `synthetic` is unset or malformed.
    PlantedModel planted_model() const;
};

/// One subgroup description: whitespace-separated tokens
///   f<j>:[lo,hi)   feature j constrained to the half-open interval
///   trigger:<v>    planted trigger
///   effect:<v>     planted effect
/// Bounds accept -inf / inf; unconstrained features default to (-inf, inf).
Subgroup parse_subgroup(const std::string& spec, std::size_t dimension);

/// Apply one key=value assignment. Shared by the file parser and CLI flag
/// overrides; throws ValidationError on unknown keys or bad values.
void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value);

RunConfig parse_run_config(const std::string& text, const std::string& source_name = "<string>");
RunConfig load_run_config(const std::string& path);

} // namespace ttree
