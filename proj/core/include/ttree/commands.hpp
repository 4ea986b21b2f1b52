#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ttree/csv.hpp"
#include "ttree/data.hpp"
#include "ttree/evaluate.hpp"
#include "ttree/learner.hpp"
#include "ttree/runconfig.hpp"

namespace ttree {

// Command implementations backing the CLI verbs. Each validates its config,
// performs the work, writes the configured artifact files, and returns its
// results so tests (and the CLI summary printer) can inspect them.

/// Load the configured input data: the CSV at `data` (column roles applied)
/// or a freshly generated synthetic sample. Exactly one source must be set.
Dataset load_input_data(const RunConfig& config);

/// Deterministic split with the configured fractions; all randomness derives
/// from the config seed.
DataSplit make_split(const Dataset& data, const RunConfig& config);

/// Synthesize a dataset and write it as CSV when `out` is set.
Dataset cmd_generate(const RunConfig& config);

struct TrainResult {
    Tree tree;
    DataSplit split;
    std::size_t nodes = 0;
    std::size_t leaves = 0;
    std::size_t depth = 0;
};

/// Split, train, annotate leaf p-values, and write the tree file when `out`
/// is set.
TrainResult cmd_train(const RunConfig& config);

struct PruneResult {
    Tree tree;
    std::size_t leaves_before = 0;
    std::size_t leaves_after = 0;
    double alpha = 0.05;
};

/// Load the tree at `tree`, rebuild the data split, significance-prune, and
/// write the pruned tree when `out` is set.
PruneResult cmd_prune(const RunConfig& config);

/// Route the rows of the CSV at `data` (matched to the tree's feature
/// columns by name) and emit per-row effect and trigger predictions; written
/// as CSV when `out` is set.
CsvTable cmd_predict(const RunConfig& config);

struct EvaluateResult {
    EffectReport report;
    std::optional<EffectReport> pruned_report;
    std::size_t pruned_leaves = 0;
};

/// Metrics for the tree at `tree` on the held-out test part (or on the whole
/// input when no test fraction is configured). When alpha is set the pruned
/// variant is evaluated too. Writes the report file when `out` is set.
EvaluateResult cmd_evaluate(const RunConfig& config);

struct TuneCell {
    double lambda = 0.0;
    double rho = 0.0;
    double score = 0.0;   // mean cross-validated ace_error
};

struct TuneResult {
    double best_lambda = 0.0;
    double best_rho = 0.0;
    std::vector<TuneCell> table;   // lambda-major, both axes ascending
};

/// K-fold cross-validation over the (lambda, rho) grid scoring ace_error;
/// ties prefer the smaller lambda, then the smaller rho. Writes the score
/// table when `out` is set.
TuneResult cmd_tune(const RunConfig& config);

/// DOT text for the tree at `tree`; written to `out` when set.
std::string cmd_export_dot(const RunConfig& config);

// Human-readable summaries (also used as the written report formats).
std::string render_train_summary(const TrainResult& result);
std::string render_report(const EvaluateResult& result);
std::string render_tune_table(const TuneResult& result);

} // namespace ttree
