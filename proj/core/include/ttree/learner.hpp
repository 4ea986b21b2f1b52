#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ttree/data.hpp"
#include "ttree/estimators.hpp"

namespace ttree {

/// Axis-aligned split: x[feature] <= threshold routes left.
struct SplitRule {
    std::size_t feature = 0;
    double threshold = 0.0;
};

struct TreeNode {
    std::optional<SplitRule> rule;              // absent => leaf
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;

    double score = 0.0;                         // node partition measure
    double ace = 0.0;                           // effect estimate at this node
    std::optional<double> trigger;              // trigger mode only
    std::size_t n_treated = 0;
    std::size_t n_control = 0;
    std::optional<double> p_value;              // filled by pruning/annotation
    std::size_t depth = 0;

    NodeSample samples;                         // in-memory only, not serialized

    bool is_leaf() const { return !rule.has_value(); }
};

/// A trained tree plus the dataset metadata needed to route new samples.
struct Tree {
    std::unique_ptr<TreeNode> root;
    std::size_t dimension = 0;
    std::vector<std::string> feature_names;
    CriterionConfig criterion;
};

struct LearnerConfig {
    CriterionConfig criterion;
    std::size_t min_group_size = 5;             // per child, per arm, on training
    std::optional<std::size_t> max_depth;
    double min_split_gain = 0.0;

    ArmRequirements requirements() const;
    void validate() const;
};

/// Candidate thresholds for one feature on the node's training subsample:
/// midpoints of consecutive distinct values (continuous) or each distinct
/// level except the largest (discrete), ascending.
std::vector<SplitRule> enumerate_splits(const NodeSample& node, const DataSplit& split,
                                        std::size_t feature);

struct SplitChoice {
    SplitRule rule;
    double left_score = 0.0;
    double right_score = 0.0;
    std::optional<TriggerResult> left_trigger;   // trigger mode only
    std::optional<TriggerResult> right_trigger;

    double total() const { return left_score + right_score; }
};

/// Best (feature, threshold) candidate by summed child criterion scores, with
/// per-child trigger search in trigger mode. Candidates whose children
/// violate the arm-size requirements are skipped; nullopt when none is valid.
/// Ties break to the lowest feature index, then the lowest threshold.
std::optional<SplitChoice> best_split(const DataSplit& split, const NodeSample& node,
                                      const LearnerConfig& config);

/// Greedy recursive partitioning: splits while the children's summed score
/// exceeds the node's own score by more than min_split_gain.
Tree train(const DataSplit& split, const LearnerConfig& config);

struct Prediction {
    double ace = 0.0;
    std::optional<double> trigger;
};

/// Route a feature vector to its leaf; returns the leaf estimate and the
/// prescribed trigger. Throws ValidationError on dimension mismatch.
Prediction predict(const Tree& tree, const std::vector<double>& features);

const TreeNode& route_to_leaf(const TreeNode& root, const std::vector<double>& features);

// Tree utilities ------------------------------------------------------------

/// Leaves in deterministic left-to-right order.
std::vector<const TreeNode*> collect_leaves(const TreeNode& root);
std::vector<TreeNode*> collect_leaves(TreeNode& root);

std::size_t node_count(const TreeNode& root);
std::size_t tree_depth(const TreeNode& root);

std::unique_ptr<TreeNode> clone(const TreeNode& root);
Tree clone(const Tree& tree);

/// Structural and value equality, ignoring in-memory sample lists.
bool trees_equal(const TreeNode& a, const TreeNode& b);

/// Recompute every node's NodeSample by routing the split's parts through
/// the stored rules (needed after loading a serialized tree).
void route_samples(Tree& tree, const DataSplit& split);

} // namespace ttree
