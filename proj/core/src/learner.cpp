#include "ttree/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include "ttree/errors.hpp"

namespace ttree {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct NodeFit {
    double score = kNegInf;
    double ace = 0.0;
    std::optional<double> trigger;
    GroupStats stats;
};

NodeFit from_eval(double score, const NodeEvaluation& eval) {
    return {score, eval.ace, eval.trigger, eval.stats};
}

/// A node's own estimate. Prefer the criterion under the learner's arm
/// requirements (so stored scores match what best_split compared); relax to
/// the bare estimator contract for nodes too small to split, and as a last
/// resort report plain mean differences with a -inf score.
NodeFit fit_node(const NodeScan& scan, const CriterionConfig& criterion,
                 const ArmRequirements& req) {
    if (auto eval = evaluate_node(scan, criterion, req)) return from_eval(eval->score, *eval);
    if (auto eval = evaluate_node(scan, criterion)) return from_eval(eval->score, *eval);
    CriterionConfig plain = criterion;
    plain.kind = CriterionKind::Adaptive;
    if (auto eval = evaluate_node(scan, plain)) return from_eval(kNegInf, *eval);
    throw NoVariation("node admits no treatment/control contrast");
}

std::pair<NodeSample, NodeSample> partition_samples(const DataSplit& split, const NodeSample& node,
                                                    const SplitRule& rule) {
    NodeSample left;
    NodeSample right;
    auto route = [&rule](const Dataset& part, const std::vector<std::size_t>& idx,
                         std::vector<std::size_t>& to_left, std::vector<std::size_t>& to_right) {
        for (std::size_t row : idx) {
            const bool goes_left = part.samples[row].features[rule.feature] <= rule.threshold;
            (goes_left ? to_left : to_right).push_back(row);
        }
    };
    route(split.train, node.train_idx, left.train_idx, right.train_idx);
    route(split.validation, node.val_idx, left.val_idx, right.val_idx);
    route(split.estimation, node.est_idx, left.est_idx, right.est_idx);
    return {std::move(left), std::move(right)};
}

std::optional<SplitChoice> best_split_scan(const DataSplit& split, const NodeSample& node,
                                           const NodeScan& scan, const LearnerConfig& config) {
    const ArmRequirements req = config.requirements();
    std::optional<SplitChoice> best;
    for (std::size_t feature = 0; feature < split.train.dimension; ++feature) {
        for (const SplitRule& rule : enumerate_splits(node, split, feature)) {
            NodeScan left = scan.filter_children(split, feature, rule.threshold, true);
            NodeScan right = scan.filter_children(split, feature, rule.threshold, false);
            auto left_eval = evaluate_node(left, config.criterion, req);
            if (!left_eval) continue;
            auto right_eval = evaluate_node(right, config.criterion, req);
            if (!right_eval) continue;

            const double total = left_eval->score + right_eval->score;
            // Strict > with ascending (feature, threshold) iteration breaks
            // ties toward the lowest feature index, then lowest threshold.
            if (best && total <= best->total()) continue;

            SplitChoice choice;
            choice.rule = rule;
            choice.left_score = left_eval->score;
            choice.right_score = right_eval->score;
            if (left_eval->trigger) {
                choice.left_trigger =
                    TriggerResult{*left_eval->trigger, left_eval->score, left_eval->ace,
                                  left_eval->stats};
            }
            if (right_eval->trigger) {
                choice.right_trigger =
                    TriggerResult{*right_eval->trigger, right_eval->score, right_eval->ace,
                                  right_eval->stats};
            }
            best = choice;
        }
    }
    return best;
}

std::unique_ptr<TreeNode> grow(const DataSplit& split, const LearnerConfig& config,
                               NodeSample node, std::size_t depth) {
    NodeScan scan = NodeScan::build(split, node, config.criterion);
    auto tree_node = std::make_unique<TreeNode>();
    tree_node->depth = depth;

    NodeFit fit = fit_node(scan, config.criterion, config.requirements());
    tree_node->score = fit.score;
    tree_node->ace = fit.ace;
    tree_node->trigger = fit.trigger;
    tree_node->n_treated = fit.stats.n_treated;
    tree_node->n_control = fit.stats.n_control;

    const bool depth_allows = !config.max_depth || depth < *config.max_depth;
    if (depth_allows && node.train_idx.size() >= 2) {
        if (auto choice = best_split_scan(split, node, scan, config)) {
            if (choice->total() > tree_node->score + config.min_split_gain) {
                auto [left_node, right_node] = partition_samples(split, node, choice->rule);
                tree_node->rule = choice->rule;
                tree_node->left = grow(split, config, std::move(left_node), depth + 1);
                tree_node->right = grow(split, config, std::move(right_node), depth + 1);
            }
        }
    }
    tree_node->samples = std::move(node);
    return tree_node;
}

} // namespace

ArmRequirements LearnerConfig::requirements() const {
    ArmRequirements req;
    req.train_per_arm = std::max<std::size_t>(min_group_size, 1);
    req.val_per_arm = criterion.uses_validation() ? 1 : 0;
    req.est_per_arm = criterion.uses_estimation() ? 1 : 0;
    return req;
}

void LearnerConfig::validate() const {
    criterion.validate();
    if (min_group_size == 0) throw ValidationError("min_group_size must be at least 1");
    if (!(min_split_gain >= 0.0) || !std::isfinite(min_split_gain))
        throw ValidationError("min_split_gain must be finite and non-negative");
}

std::vector<SplitRule> enumerate_splits(const NodeSample& node, const DataSplit& split,
                                        std::size_t feature) {
    if (feature >= split.train.dimension)
        throw ValidationError("split feature index out of range");

    std::vector<double> values;
    values.reserve(node.train_idx.size());
    for (std::size_t row : node.train_idx)
        values.push_back(split.train.samples[row].features[feature]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    std::vector<SplitRule> rules;
    if (values.size() < 2) return rules;
    rules.reserve(values.size() - 1);

    const bool discrete = split.train.feature_kinds[feature] == FeatureKind::Discrete;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        double threshold;
        if (discrete) {
            threshold = values[i];
        } else {
            threshold = values[i] + (values[i + 1] - values[i]) / 2.0;
            // Adjacent representable values can round the midpoint onto the
            // upper neighbour; fall back to the lower value so the rule still
            // separates the pair.
            if (threshold >= values[i + 1]) threshold = values[i];
        }
        rules.push_back({feature, threshold});
    }
    return rules;
}

std::optional<SplitChoice> best_split(const DataSplit& split, const NodeSample& node,
                                      const LearnerConfig& config) {
    config.validate();
    NodeScan scan = NodeScan::build(split, node, config.criterion);
    return best_split_scan(split, node, scan, config);
}

Tree train(const DataSplit& split, const LearnerConfig& config) {
    config.validate();
    split.train.validate();
    if (split.train.samples.empty()) throw EmptyData("training sample is empty");

    const CriterionConfig& criterion = config.criterion;
    if (criterion.uses_validation() && split.validation.samples.empty())
        throw ValidationError(to_string(criterion.kind) +
                              " criterion requires a validation sample");
    if (criterion.uses_estimation() && split.estimation.samples.empty() &&
        split.validation.samples.empty())
        throw ValidationError(to_string(criterion.kind) +
                              " criterion requires an estimation (or validation) sample");

    if (criterion.trigger_mode) {
        std::set<double> distinct;
        for (const Sample& s : split.train.samples) distinct.insert(s.treatment);
        if (distinct.size() < 2)
            throw NoVariation("trigger mode needs at least two distinct treatment values");
    } else {
        GroupStats stats = group_stats(split.train, kBinaryTreatmentThreshold);
        if (!stats.means_defined())
            throw NoVariation("binary mode needs both treated and control samples");
    }

    Tree tree;
    tree.dimension = split.train.dimension;
    tree.feature_names = split.train.feature_names;
    tree.criterion = criterion;
    tree.root = grow(split, config, NodeSample::whole(split), 0);
    return tree;
}

const TreeNode& route_to_leaf(const TreeNode& root, const std::vector<double>& features) {
    const TreeNode* current = &root;
    while (!current->is_leaf()) {
        const SplitRule& rule = *current->rule;
        current = features[rule.feature] <= rule.threshold ? current->left.get()
                                                           : current->right.get();
    }
    return *current;
}

Prediction predict(const Tree& tree, const std::vector<double>& features) {
    if (!tree.root) throw ValidationError("predict called on an empty tree");
    if (features.size() != tree.dimension)
        throw ValidationError("feature vector has " + std::to_string(features.size()) +
                              " entries, tree expects " + std::to_string(tree.dimension));
    const TreeNode& leaf = route_to_leaf(*tree.root, features);
    return {leaf.ace, leaf.trigger};
}

namespace {

template <typename Node>
void collect_leaves_impl(Node& node, std::vector<Node*>& out) {
    if (node.is_leaf()) {
        out.push_back(&node);
        return;
    }
    collect_leaves_impl<Node>(*node.left, out);
    collect_leaves_impl<Node>(*node.right, out);
}

} // namespace

std::vector<const TreeNode*> collect_leaves(const TreeNode& root) {
    std::vector<const TreeNode*> leaves;
    collect_leaves_impl(root, leaves);
    return leaves;
}

std::vector<TreeNode*> collect_leaves(TreeNode& root) {
    std::vector<TreeNode*> leaves;
    collect_leaves_impl(root, leaves);
    return leaves;
}

std::size_t node_count(const TreeNode& root) {
    if (root.is_leaf()) return 1;
    return 1 + node_count(*root.left) + node_count(*root.right);
}

std::size_t tree_depth(const TreeNode& root) {
    if (root.is_leaf()) return 0;
    return 1 + std::max(tree_depth(*root.left), tree_depth(*root.right));
}

std::unique_ptr<TreeNode> clone(const TreeNode& root) {
    auto copy = std::make_unique<TreeNode>();
    copy->rule = root.rule;
    copy->score = root.score;
    copy->ace = root.ace;
    copy->trigger = root.trigger;
    copy->n_treated = root.n_treated;
    copy->n_control = root.n_control;
    copy->p_value = root.p_value;
    copy->depth = root.depth;
    copy->samples = root.samples;
    if (!root.is_leaf()) {
        copy->left = clone(*root.left);
        copy->right = clone(*root.right);
    }
    return copy;
}

Tree clone(const Tree& tree) {
    Tree copy;
    copy.dimension = tree.dimension;
    copy.feature_names = tree.feature_names;
    copy.criterion = tree.criterion;
    if (tree.root) copy.root = clone(*tree.root);
    return copy;
}

namespace {

bool same_optional(const std::optional<double>& a, const std::optional<double>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || *a == *b;
}

} // namespace

bool trees_equal(const TreeNode& a, const TreeNode& b) {
    if (a.rule.has_value() != b.rule.has_value()) return false;
    if (a.rule && (a.rule->feature != b.rule->feature || a.rule->threshold != b.rule->threshold))
        return false;
    if (a.score != b.score || a.ace != b.ace) return false;
    if (!same_optional(a.trigger, b.trigger) || !same_optional(a.p_value, b.p_value)) return false;
    if (a.n_treated != b.n_treated || a.n_control != b.n_control) return false;
    if (a.depth != b.depth) return false;
    if (!a.rule) return true;
    return trees_equal(*a.left, *b.left) && trees_equal(*a.right, *b.right);
}

namespace {

void route_samples_impl(TreeNode& node, const DataSplit& split, NodeSample sample) {
    if (!node.is_leaf()) {
        auto [left, right] = partition_samples(split, sample, *node.rule);
        route_samples_impl(*node.left, split, std::move(left));
        route_samples_impl(*node.right, split, std::move(right));
    }
    node.samples = std::move(sample);
}

} // namespace

void route_samples(Tree& tree, const DataSplit& split) {
    if (!tree.root) throw ValidationError("route_samples called on an empty tree");
    if (split.train.dimension != tree.dimension)
        throw ValidationError("data dimension " + std::to_string(split.train.dimension) +
                              " does not match tree dimension " +
                              std::to_string(tree.dimension));
    route_samples_impl(*tree.root, split, NodeSample::whole(split));
}

} // namespace ttree
