#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ttree/data.hpp"

namespace ttree {

/// Binary mode stores the 0/1 arm indicator in the treatment column; anything
/// at or above this threshold counts as treated.
inline constexpr double kBinaryTreatmentThreshold = 0.5;

/// Which partition measure drives splitting.
///   Adaptive    : F(tr) = N * tau^2, training data only
///   Honest      : F(tr) - H, variance penalty sized by the estimation set
///   Learn       : F_C, validation-cost-penalized measure
///   HonestLearn : F_C - H with a separate estimation set
///   HonestVal   : F_C - H_val, validation doubles as the estimation set
enum class CriterionKind { Adaptive, Honest, Learn, HonestLearn, HonestVal };

std::string to_string(CriterionKind kind);
CriterionKind criterion_kind_from_string(const std::string& name);

struct CriterionConfig {
    CriterionKind kind = CriterionKind::Learn;
    double lambda = 0.5;                          // cost weight, [0, 1]
    bool trigger_mode = true;
    std::optional<std::size_t> max_trigger_candidates;
    // Honest-penalty share p: within-node treated share (default) or the
    // global train fraction of the source dataset.
    bool honest_global_share = false;

    bool uses_validation() const {
        return kind == CriterionKind::Learn || kind == CriterionKind::HonestLearn ||
               kind == CriterionKind::HonestVal;
    }
    bool uses_estimation() const {
        return kind == CriterionKind::Honest || kind == CriterionKind::HonestLearn;
    }
    bool uses_honest_penalty() const {
        return kind == CriterionKind::Honest || kind == CriterionKind::HonestLearn ||
               kind == CriterionKind::HonestVal;
    }
    void validate() const;
};

/// Per-arm counts, outcome means and unbiased outcome variances for one
/// subsample under a fixed binarization. Means require a nonempty arm,
/// variances an arm of size >= 2; undefined values are NaN.
struct GroupStats {
    std::size_t n_treated = 0;
    std::size_t n_control = 0;
    double mean_treated = 0.0;
    double mean_control = 0.0;
    double var_treated = 0.0;
    double var_control = 0.0;

    std::size_t size() const { return n_treated + n_control; }
    bool means_defined() const { return n_treated > 0 && n_control > 0; }
    bool vars_defined() const { return n_treated >= 2 && n_control >= 2; }
    double treated_share() const {
        return static_cast<double>(n_treated) / static_cast<double>(size());
    }
};

/// Arm statistics for a dataset. Exactly one of `trigger` (treated iff
/// t >= trigger) or `treated_flags` selects the arms.
GroupStats group_stats(const Dataset& data, std::optional<double> trigger,
                       const std::vector<bool>* treated_flags = nullptr);

/// Mean-difference effect estimate. Throws DegenerateGroup when an arm is
/// empty.
double ace(const GroupStats& stats);

/// Node partition measure F = N * tau^2.
double partition_measure_f(std::size_t n, double tau_hat);

/// Validation disagreement penalty C = N_val * |tau_val - tau_train|.
double cost_term(std::size_t n_val, double tau_val, double tau_train);

/// Cost-penalized measure F_C = ((1-lambda)*F - lambda*C) / (|N_tr - N_val| + 1).
double f_c(double f_train, double cost, std::size_t n_train, std::size_t n_val, double lambda);

/// Variance penalty H = (1 + n_est/n) * (V1/p + V0/(1-p)) with p taken from
/// `stats` (within-node treated share). Throws DegenerateGroup when a
/// variance is undefined or p is 0 or 1.
double honest_penalty(const GroupStats& stats, std::size_t n_est, std::size_t n);
double honest_penalty(const GroupStats& stats, std::size_t n_est, std::size_t n, double p);

// ---------------------------------------------------------------------------
// Node evaluation machinery.
//
// SubsampleScan holds one part of a node's data sorted by treatment with
// centered prefix sums, so arm statistics at any trigger cost O(log n).
// Child scans are linear filters of the parent, preserving order, which keeps
// the full (feature split x trigger) search near O(n^2) per feature.
// ---------------------------------------------------------------------------

class SubsampleScan {
  public:
    SubsampleScan() = default;
    SubsampleScan(const Dataset& part, const std::vector<std::size_t>& indices);

    std::size_t size() const { return rows_.size(); }
    const std::vector<std::size_t>& rows() const { return rows_; }
    const std::vector<double>& treatments() const { return treatments_; }

    GroupStats stats_at(double trigger) const;

    /// Rows with feature `j` <= / > threshold, treatment order preserved.
    SubsampleScan filter(const Dataset& part, std::size_t feature, double threshold,
                         bool keep_left) const;

  private:
    void build_prefix();

    std::vector<std::size_t> rows_;       // sorted by (treatment, source row)
    std::vector<double> treatments_;      // aligned, ascending
    std::vector<double> centered_;        // outcome - center_
    std::vector<double> prefix_sum_;      // centered prefix sums
    std::vector<double> prefix_sq_;       // centered squared prefix sums
    double center_ = 0.0;
};

/// All per-part scans a criterion needs at one node. For the Honest kind
/// without a separate estimation part, the validation part stands in as the
/// estimation sample.
struct NodeScan {
    SubsampleScan train;
    SubsampleScan val;
    SubsampleScan est;
    bool est_is_val = false;              // validation doubles as estimation
    std::size_t global_train_n = 0;       // for honest_global_share
    std::size_t global_total_n = 0;

    const SubsampleScan& estimation() const { return est_is_val ? val : est; }

    static NodeScan build(const DataSplit& split, const NodeSample& node,
                          const CriterionConfig& config);
    NodeScan filter_children(const DataSplit& split, std::size_t feature, double threshold,
                             bool keep_left) const;
};

/// Minimum arm sizes a trigger / split candidate must satisfy. Defaults are
/// the bare estimator contract; the tree learner passes stricter values.
struct ArmRequirements {
    std::size_t train_per_arm = 1;
    std::size_t val_per_arm = 0;
    std::size_t est_per_arm = 0;
};

/// The configured partition measure at a fixed binarization. nullopt means
/// the candidate is invalid (degenerate group somewhere it matters).
std::optional<double> criterion_score_at(const NodeScan& scan, const CriterionConfig& config,
                                         double trigger,
                                         const ArmRequirements& req = {});

/// Convenience wrapper building the scan for `node`. In binary mode the
/// trigger argument is ignored and the 0/1 indicator is used.
std::optional<double> criterion_score(const DataSplit& split, const NodeSample& node,
                                      const CriterionConfig& config,
                                      std::optional<double> trigger);

struct TriggerResult {
    double trigger = 0.0;     // chosen threshold; element of the candidate set
    double score = 0.0;       // criterion value at the trigger
    double ace = 0.0;         // effect estimate on the kind's estimation sample
    GroupStats stats;         // arm stats backing `ace`
};

/// Candidate triggers for a node: the distinct treatment values, optionally
/// thinned to at most `max_candidates` empirical quantiles.
std::vector<double> trigger_candidates(const std::vector<double>& sorted_treatments,
                                       std::optional<std::size_t> max_candidates);

/// Exhaustive trigger search: scores every candidate with the configured
/// criterion and returns the argmax (ties -> smallest trigger). nullopt when
/// fewer than two distinct treatment values exist or no candidate is valid.
std::optional<TriggerResult> find_trigger(const NodeScan& scan, const CriterionConfig& config,
                                          const ArmRequirements& req = {});
std::optional<TriggerResult> find_trigger(const DataSplit& split, const NodeSample& node,
                                          const CriterionConfig& config);

/// Node evaluation covering both modes: in trigger mode runs find_trigger,
/// in binary mode scores the fixed 0/1 binarization. The reported ace/stats
/// come from the kind's estimation sample (train for Adaptive/Learn, est for
/// Honest/HonestLearn, validation for HonestVal), falling back to train when
/// that sample is degenerate at the chosen trigger.
struct NodeEvaluation {
    double score = 0.0;
    double ace = 0.0;
    std::optional<double> trigger;
    GroupStats stats;
};

std::optional<NodeEvaluation> evaluate_node(const NodeScan& scan, const CriterionConfig& config,
                                            const ArmRequirements& req = {});

} // namespace ttree
