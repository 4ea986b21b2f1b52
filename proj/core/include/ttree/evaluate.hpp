#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ttree/data.hpp"
#include "ttree/learner.hpp"

namespace ttree {

/// Per-leaf evaluation row. `ace_test` is the test-sample effect at the
/// leaf's trigger; absent when a test arm is empty (leaf skipped).
struct LeafReport {
    std::size_t leaf_id = 0;                // left-to-right leaf index
    std::size_t n_test = 0;                 // test rows routed to the leaf
    double ace_stored = 0.0;                // training-time estimate
    std::optional<double> ace_test;
    std::optional<double> trigger;
    std::optional<double> p_value;          // carried over from the tree
};

struct EffectReport {
    double ace_error = 0.0;                 // in [0, 1]
    std::optional<double> unit_smape;       // needs a true-effect column
    double leaf_variance = 0.0;
    double mahalanobis_balance = 0.0;
    std::size_t leaves_evaluated = 0;       // leaves entering ace_error
    std::size_t leaves_skipped = 0;         // degenerate test arms
    std::size_t balance_leaves = 0;         // leaves entering the balance mean
    std::vector<LeafReport> per_leaf;
};

/// |a - b| / (|a| + |b|), with the 0/0 case defined as 0.
double smape_term(double predicted, double truth);

/// Mean per-unit SMAPE between predicted and true effects.
double unit_smape(const std::vector<double>& predicted, const std::vector<double>& truth);

/// Unbiased sample variance of leaf effects; fewer than two leaves -> 0.
double leaf_variance(const std::vector<double>& leaf_effects);

/// Covariate balance of one leaf: covariance pooled over both arms,
/// regularized as Sigma + eps*I with eps = 1e-6 * trace(Sigma)/d, then the
/// average Mahalanobis distance of each unit to the opposite arm's mean.
/// Throws DegenerateGroup (empty arm, too few samples, singular covariance).
double mahalanobis_balance(const Dataset& leaf_samples, std::optional<double> trigger);

struct AceErrorResult {
    double value = 0.0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
};

/// Mean over evaluable leaves of the SMAPE between the stored leaf estimate
/// and the test-sample effect at the leaf's trigger. Only leaves in `leaves`
/// are considered (pass all leaves or, say, just the significant ones).
/// Throws DegenerateGroup when no leaf is evaluable.
AceErrorResult ace_error(const Tree& tree, const Dataset& test,
                         const std::vector<const TreeNode*>& leaves);

/// Full metric suite on a held-out test set: ace_error over all leaves,
/// unit SMAPE when the test set carries true effects, variance of leaf
/// effects, and the mean per-leaf Mahalanobis balance (leaves that cannot
/// support a covariance estimate are excluded from that mean).
EffectReport evaluate_tree(const Tree& tree, const Dataset& test);

} // namespace ttree
