#include "ttree/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ttree/errors.hpp"
#include "ttree/estimators.hpp"

namespace ttree {

namespace {

// Modified Lentz continued fraction for the incomplete beta (Numerical
// Recipes form). Converges quickly for x < (a+1)/(a+b+2).
double beta_continued_fraction(double a, double b, double x) {
    constexpr double kTiny = 1e-300;
    constexpr double kRelTol = 1e-10;
    constexpr int kMaxIter = 500;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kRelTol) return h;
    }
    return h; // converged to working precision in practice well before this
}

double mean_of(const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double unbiased_variance(const std::vector<double>& values, double mean) {
    double sum_sq = 0.0;
    for (double v : values) {
        const double d = v - mean;
        sum_sq += d * d;
    }
    return sum_sq / static_cast<double>(values.size() - 1);
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw ValidationError("incomplete beta requires positive shape parameters");
    if (std::isnan(x)) throw ValidationError("incomplete beta argument is NaN");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;

    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double two_sided_t_p_value(double t, double dof) {
    if (!(dof > 0.0)) throw ValidationError("degrees of freedom must be positive");
    if (std::isnan(t)) throw ValidationError("t statistic is NaN");
    if (std::isinf(t)) return 0.0;
    const double x = dof / (dof + t * t);
    return std::clamp(regularized_incomplete_beta(dof / 2.0, 0.5, x), 0.0, 1.0);
}

double student_t_cdf(double t, double dof) {
    if (!(dof > 0.0)) throw ValidationError("degrees of freedom must be positive");
    if (std::isnan(t)) throw ValidationError("t statistic is NaN");
    if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
    const double tail = 0.5 * regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
    return t >= 0.0 ? 1.0 - tail : tail;
}

TTestResult welch_t_test(const std::vector<double>& treated,
                         const std::vector<double>& control) {
    if (treated.size() < 2 || control.size() < 2)
        throw DegenerateGroup("t-test needs at least two values per group");

    const double n1 = static_cast<double>(treated.size());
    const double n0 = static_cast<double>(control.size());
    const double m1 = mean_of(treated);
    const double m0 = mean_of(control);
    const double v1 = unbiased_variance(treated, m1);
    const double v0 = unbiased_variance(control, m0);

    TTestResult result;
    if (v1 == 0.0 && v0 == 0.0) {
        result.dof = n1 + n0 - 2.0;
        if (m1 == m0) {
            result.t_statistic = 0.0;
            result.p_value = 1.0;
        } else {
            result.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), m1 - m0);
            result.p_value = 0.0;
        }
        return result;
    }

    const double se1 = v1 / n1;
    const double se0 = v0 / n0;
    const double se2 = se1 + se0;
    result.t_statistic = (m1 - m0) / std::sqrt(se2);
    result.dof = se2 * se2 / (se1 * se1 / (n1 - 1.0) + se0 * se0 / (n0 - 1.0));
    result.p_value = two_sided_t_p_value(result.t_statistic, result.dof);
    return result;
}

namespace {

void append_arm_outcomes(const Dataset& part, const std::vector<std::size_t>& rows,
                         double trigger, std::vector<double>& treated,
                         std::vector<double>& control) {
    for (std::size_t row : rows) {
        const Sample& s = part.samples[row];
        (s.treatment >= trigger ? treated : control).push_back(s.outcome);
    }
}

} // namespace

double leaf_p_value(const TreeNode& leaf, const DataSplit& split,
                    const CriterionConfig& criterion) {
    double trigger = kBinaryTreatmentThreshold;
    if (criterion.trigger_mode && leaf.trigger) trigger = *leaf.trigger;

    std::vector<double> treated;
    std::vector<double> control;
    const bool use_estimation =
        criterion.uses_estimation() && !leaf.samples.est_idx.empty();
    if (use_estimation) {
        append_arm_outcomes(split.estimation, leaf.samples.est_idx, trigger, treated, control);
    } else {
        append_arm_outcomes(split.train, leaf.samples.train_idx, trigger, treated, control);
        append_arm_outcomes(split.validation, leaf.samples.val_idx, trigger, treated, control);
    }

    if (treated.size() < 2 || control.size() < 2) return 1.0;
    return welch_t_test(treated, control).p_value;
}

namespace {

void annotate_impl(TreeNode& node, const DataSplit& split, const CriterionConfig& criterion) {
    if (node.is_leaf()) {
        node.p_value = leaf_p_value(node, split, criterion);
        return;
    }
    annotate_impl(*node.left, split, criterion);
    annotate_impl(*node.right, split, criterion);
}

/// Post-order collapse; a single pass reaches the fixpoint because a parent
/// is visited after its children have had their chance to become leaves.
void prune_impl(TreeNode& node, const DataSplit& split, const CriterionConfig& criterion,
                double alpha) {
    if (node.is_leaf()) {
        node.p_value = leaf_p_value(node, split, criterion);
        return;
    }
    prune_impl(*node.left, split, criterion, alpha);
    prune_impl(*node.right, split, criterion, alpha);
    if (!node.left->is_leaf() || !node.right->is_leaf()) return;

    const bool left_significant = *node.left->p_value < alpha;
    const bool right_significant = *node.right->p_value < alpha;
    if (left_significant || right_significant) return;

    node.rule.reset();
    node.left.reset();
    node.right.reset();
    node.p_value = leaf_p_value(node, split, criterion);
}

} // namespace

void annotate_p_values(Tree& tree, const DataSplit& split) {
    if (!tree.root) throw ValidationError("cannot annotate an empty tree");
    route_samples(tree, split);
    annotate_impl(*tree.root, split, tree.criterion);
}

Tree prune(const Tree& tree, const DataSplit& split, double alpha) {
    if (!tree.root) throw ValidationError("cannot prune an empty tree");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ValidationError("alpha must lie in [0, 1]");
    Tree pruned = clone(tree);
    route_samples(pruned, split);
    prune_impl(*pruned.root, split, pruned.criterion, alpha);
    return pruned;
}

std::vector<const TreeNode*> significant_leaves(const Tree& tree, double alpha) {
    if (!tree.root) throw ValidationError("cannot filter leaves of an empty tree");
    std::vector<const TreeNode*> result;
    for (const TreeNode* leaf : collect_leaves(*tree.root)) {
        if (!leaf->p_value)
            throw ValidationError("leaf p-values missing; prune or annotate the tree first");
        if (*leaf->p_value < alpha) result.push_back(leaf);
    }
    return result;
}

bool sd_overlap_significant(double mean_a, double sd_a, double mean_b, double sd_b) {
    if (!(sd_a >= 0.0) || !(sd_b >= 0.0))
        throw ValidationError("standard deviations must be non-negative");
    return mean_a + sd_a < mean_b - sd_b || mean_b + sd_b < mean_a - sd_a;
}

} // namespace ttree
