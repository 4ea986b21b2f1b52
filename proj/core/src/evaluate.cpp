#include "ttree/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <Eigen/Dense>

#include "ttree/errors.hpp"
#include "ttree/estimators.hpp"

namespace ttree {

double smape_term(double predicted, double truth) {
    const double denom = std::fabs(predicted) + std::fabs(truth);
    if (denom == 0.0) return 0.0;
    return std::fabs(predicted - truth) / denom;
}

double unit_smape(const std::vector<double>& predicted, const std::vector<double>& truth) {
    if (predicted.size() != truth.size())
        throw ValidationError("unit_smape needs equal-length prediction and truth lists");
    if (predicted.empty()) throw EmptyData("unit_smape needs at least one unit");
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) sum += smape_term(predicted[i], truth[i]);
    return sum / static_cast<double>(predicted.size());
}

double leaf_variance(const std::vector<double>& leaf_effects) {
    const std::size_t n = leaf_effects.size();
    if (n < 2) return 0.0;
    double mean = 0.0;
    for (double v : leaf_effects) mean += v;
    mean /= static_cast<double>(n);
    double sum_sq = 0.0;
    for (double v : leaf_effects) {
        const double d = v - mean;
        sum_sq += d * d;
    }
    return sum_sq / static_cast<double>(n - 1);
}

double mahalanobis_balance(const Dataset& leaf_samples, std::optional<double> trigger) {
    const std::size_t n = leaf_samples.samples.size();
    const std::size_t d = leaf_samples.dimension;
    if (n == 0) throw EmptyData("balance of an empty leaf");
    if (n < d + 1)
        throw DegenerateGroup("leaf too small for a covariance estimate");

    const double threshold = trigger.value_or(kBinaryTreatmentThreshold);
    std::vector<const Sample*> treated;
    std::vector<const Sample*> control;
    for (const Sample& s : leaf_samples.samples)
        (s.treatment >= threshold ? treated : control).push_back(&s);
    if (treated.empty() || control.empty())
        throw DegenerateGroup("balance needs both arms populated");

    Eigen::MatrixXd features(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                leaf_samples.samples[i].features[j];

    const Eigen::RowVectorXd pooled_mean = features.colwise().mean();
    const Eigen::MatrixXd centered = features.rowwise() - pooled_mean;
    Eigen::MatrixXd sigma =
        centered.transpose() * centered / static_cast<double>(n - 1);

    const double ridge = 1e-6 * sigma.trace() / static_cast<double>(d);
    sigma += ridge * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                               static_cast<Eigen::Index>(d));

    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw DegenerateGroup("singular leaf covariance after regularization");

    auto arm_mean = [&](const std::vector<const Sample*>& arm) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
        for (const Sample* s : arm)
            for (std::size_t j = 0; j < d; ++j)
                mean(static_cast<Eigen::Index>(j)) += s->features[j];
        return Eigen::VectorXd(mean / static_cast<double>(arm.size()));
    };
    const Eigen::VectorXd mean_treated = arm_mean(treated);
    const Eigen::VectorXd mean_control = arm_mean(control);

    auto distance_to = [&](const Sample& s, const Eigen::VectorXd& opposite) {
        Eigen::VectorXd diff(static_cast<Eigen::Index>(d));
        for (std::size_t j = 0; j < d; ++j)
            diff(static_cast<Eigen::Index>(j)) = s.features[j] - opposite(static_cast<Eigen::Index>(j));
        const double squared = diff.dot(llt.solve(diff));
        return std::sqrt(std::max(squared, 0.0));
    };

    double total = 0.0;
    for (const Sample* s : treated) total += distance_to(*s, mean_control);
    for (const Sample* s : control) total += distance_to(*s, mean_treated);
    return total / static_cast<double>(n);
}

namespace {

/// Test rows per leaf, keyed by leaf pointer, in routing order.
std::unordered_map<const TreeNode*, std::vector<std::size_t>>
route_test_rows(const Tree& tree, const Dataset& test) {
    std::unordered_map<const TreeNode*, std::vector<std::size_t>> routed;
    for (std::size_t i = 0; i < test.samples.size(); ++i) {
        const TreeNode& leaf = route_to_leaf(*tree.root, test.samples[i].features);
        routed[&leaf].push_back(i);
    }
    return routed;
}

std::optional<double> test_effect(const Dataset& test, const std::vector<std::size_t>& rows,
                                  std::optional<double> trigger) {
    if (rows.empty()) return std::nullopt;
    const Dataset leaf_data = subset(test, rows);
    const GroupStats stats =
        group_stats(leaf_data, trigger.value_or(kBinaryTreatmentThreshold));
    if (!stats.means_defined()) return std::nullopt;
    return ace(stats);
}

void check_test_data(const Tree& tree, const Dataset& test) {
    if (!tree.root) throw ValidationError("cannot evaluate an empty tree");
    test.validate();
    if (test.samples.empty()) throw EmptyData("test sample is empty");
    if (test.dimension != tree.dimension)
        throw ValidationError("test dimension " + std::to_string(test.dimension) +
                              " does not match tree dimension " +
                              std::to_string(tree.dimension));
}

} // namespace

AceErrorResult ace_error(const Tree& tree, const Dataset& test,
                         const std::vector<const TreeNode*>& leaves) {
    check_test_data(tree, test);
    const auto routed = route_test_rows(tree, test);

    AceErrorResult result;
    double sum = 0.0;
    static const std::vector<std::size_t> kNoRows;
    for (const TreeNode* leaf : leaves) {
        const auto it = routed.find(leaf);
        const auto& rows = it == routed.end() ? kNoRows : it->second;
        const std::optional<double> observed = test_effect(test, rows, leaf->trigger);
        if (!observed) {
            ++result.skipped;
            continue;
        }
        sum += smape_term(leaf->ace, *observed);
        ++result.evaluated;
    }
    if (result.evaluated == 0)
        throw DegenerateGroup("no leaf received test samples in both arms");
    result.value = sum / static_cast<double>(result.evaluated);
    return result;
}

EffectReport evaluate_tree(const Tree& tree, const Dataset& test) {
    check_test_data(tree, test);
    const std::vector<const TreeNode*> leaves =
        collect_leaves(std::as_const(*tree.root));
    const auto routed = route_test_rows(tree, test);

    EffectReport report;
    double ace_sum = 0.0;
    double balance_sum = 0.0;
    std::vector<double> effects;
    effects.reserve(leaves.size());
    static const std::vector<std::size_t> kNoRows;

    for (std::size_t id = 0; id < leaves.size(); ++id) {
        const TreeNode* leaf = leaves[id];
        const auto it = routed.find(leaf);
        const auto& rows = it == routed.end() ? kNoRows : it->second;

        LeafReport row;
        row.leaf_id = id;
        row.n_test = rows.size();
        row.ace_stored = leaf->ace;
        row.trigger = leaf->trigger;
        row.p_value = leaf->p_value;
        row.ace_test = test_effect(test, rows, leaf->trigger);

        if (row.ace_test) {
            ace_sum += smape_term(leaf->ace, *row.ace_test);
            ++report.leaves_evaluated;
        } else {
            ++report.leaves_skipped;
        }

        if (!rows.empty()) {
            try {
                balance_sum += mahalanobis_balance(subset(test, rows), leaf->trigger);
                ++report.balance_leaves;
            } catch (const std::runtime_error&) {
                // Leaf cannot support a balance estimate; excluded from the mean.
            }
        }

        effects.push_back(leaf->ace);
        report.per_leaf.push_back(std::move(row));
    }

    if (report.leaves_evaluated == 0)
        throw DegenerateGroup("no leaf received test samples in both arms");
    report.ace_error = ace_sum / static_cast<double>(report.leaves_evaluated);
    report.leaf_variance = leaf_variance(effects);
    if (report.balance_leaves > 0)
        report.mahalanobis_balance = balance_sum / static_cast<double>(report.balance_leaves);

    if (test.has_true_effects()) {
        std::vector<double> predicted;
        std::vector<double> truth;
        predicted.reserve(test.samples.size());
        truth.reserve(test.samples.size());
        for (const Sample& s : test.samples) {
            const TreeNode& leaf = route_to_leaf(*tree.root, s.features);
            predicted.push_back(leaf.ace);
            truth.push_back(*s.true_effect);
        }
        report.unit_smape = unit_smape(predicted, truth);
    }
    return report;
}

} // namespace ttree
