#pragma once

#include <vector>

#include "ttree/data.hpp"
#include "ttree/learner.hpp"

namespace ttree {

struct TTestResult {
    double t_statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
};

/// Welch's unequal-variance two-sided t-test of the mean difference, with
/// Welch-Satterthwaite degrees of freedom. Each group needs >= 2 values.
/// Degenerate rule: both variances zero -> p = 1 if the means are equal,
/// p = 0 otherwise.
TTestResult welch_t_test(const std::vector<double>& treated,
                         const std::vector<double>& control);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation to
/// relative tolerance 1e-10 (platform-stable p-values).
double regularized_incomplete_beta(double a, double b, double x);

/// Student-t CDF with real degrees of freedom > 0.
double student_t_cdf(double t, double dof);

/// Two-sided p-value for a t statistic: I_x(dof/2, 1/2) with
/// x = dof / (dof + t^2).
double two_sided_t_p_value(double t, double dof);

/// Welch test of a leaf's effect on the sample the criterion reserves for
/// inference: the estimation part for criteria that keep one, otherwise the
/// leaf's pooled training+validation rows. Outcomes are arm-assigned by the
/// leaf's trigger (0/1 indicator in binary mode). Groups too small to test
/// yield p = 1 (cannot establish significance).
double leaf_p_value(const TreeNode& leaf, const DataSplit& split,
                    const CriterionConfig& criterion);

/// Fill p_value on every leaf without changing the structure. Routes the
/// split through the tree, so loaded trees work directly.
void annotate_p_values(Tree& tree, const DataSplit& split);

/// Significance pruning: bottom-up, an internal node whose children are both
/// leaves collapses into a leaf when neither child's effect is significant at
/// `alpha`; collapsed nodes keep their own training-time estimate and get a
/// fresh p-value. Returns a new tree; every surviving leaf carries p_value.
Tree prune(const Tree& tree, const DataSplit& split, double alpha);

/// Leaves with p_value < alpha in left-to-right order. Throws
/// ValidationError when a leaf has no p-value yet.
std::vector<const TreeNode*> significant_leaves(const Tree& tree, double alpha);

/// True iff the intervals [mean +- sd] are disjoint.
bool sd_overlap_significant(double mean_a, double sd_a, double mean_b, double sd_b);

} // namespace ttree
