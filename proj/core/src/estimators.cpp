#include "ttree/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ttree {

void CriterionConfig::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw ValidationError("criterion: lambda must lie in [0, 1]");
    }
    if (max_trigger_candidates && *max_trigger_candidates == 0) {
        throw ValidationError("criterion: max_trigger_candidates must be positive");
    }
}

std::string to_string(CriterionKind kind) {
    switch (kind) {
        case CriterionKind::Adaptive: return "adaptive";
        case CriterionKind::Honest: return "honest";
        case CriterionKind::Learn: return "learn";
        case CriterionKind::HonestLearn: return "honest-learn";
        case CriterionKind::HonestVal: return "honest-val";
    }
    return "unknown";
}

CriterionKind criterion_kind_from_string(const std::string& name) {
    if (name == "adaptive") return CriterionKind::Adaptive;
    if (name == "honest") return CriterionKind::Honest;
    if (name == "learn") return CriterionKind::Learn;
    if (name == "honest-learn") return CriterionKind::HonestLearn;
    if (name == "honest-val") return CriterionKind::HonestVal;
    throw ValidationError("unknown criterion kind '" + name +
                          "' (expected adaptive|honest|learn|honest-learn|honest-val)");
}

// --------------------------------------------------------------------------
// Scalar estimators
// --------------------------------------------------------------------------

GroupStats group_stats(const Dataset& data, std::optional<double> trigger,
                       const std::vector<bool>* treated_flags) {
    if (trigger.has_value() == (treated_flags != nullptr)) {
        throw ValidationError("group_stats: provide exactly one of trigger or treated flags");
    }
    if (treated_flags && treated_flags->size() != data.size()) {
        throw ValidationError("group_stats: flag vector size mismatch");
    }

    GroupStats stats;
    double sum1 = 0.0, sum0 = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Sample& s = data.samples[i];
        const bool treated = trigger ? (s.treatment >= *trigger) : (*treated_flags)[i];
        if (treated) {
            ++stats.n_treated;
            sum1 += s.outcome;
        } else {
            ++stats.n_control;
            sum0 += s.outcome;
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    stats.mean_treated = stats.n_treated ? sum1 / static_cast<double>(stats.n_treated) : nan;
    stats.mean_control = stats.n_control ? sum0 / static_cast<double>(stats.n_control) : nan;

    double sq1 = 0.0, sq0 = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Sample& s = data.samples[i];
        const bool treated = trigger ? (s.treatment >= *trigger) : (*treated_flags)[i];
        const double d = s.outcome - (treated ? stats.mean_treated : stats.mean_control);
        (treated ? sq1 : sq0) += d * d;
    }
    stats.var_treated = stats.n_treated >= 2 ? sq1 / static_cast<double>(stats.n_treated - 1) : nan;
    stats.var_control = stats.n_control >= 2 ? sq0 / static_cast<double>(stats.n_control - 1) : nan;
    return stats;
}

double ace(const GroupStats& stats) {
    if (!stats.means_defined()) {
        throw DegenerateGroup("ace: treatment or control group is empty");
    }
    return stats.mean_treated - stats.mean_control;
}

double partition_measure_f(std::size_t n, double tau_hat) {
    return static_cast<double>(n) * tau_hat * tau_hat;
}

double cost_term(std::size_t n_val, double tau_val, double tau_train) {
    return static_cast<double>(n_val) * std::abs(tau_val - tau_train);
}

double f_c(double f_train, double cost, std::size_t n_train, std::size_t n_val, double lambda) {
    const double dn = std::abs(static_cast<double>(n_train) - static_cast<double>(n_val));
    return ((1.0 - lambda) * f_train - lambda * cost) / (dn + 1.0);
}

double honest_penalty(const GroupStats& stats, std::size_t n_est, std::size_t n) {
    return honest_penalty(stats, n_est, n, stats.treated_share());
}

double honest_penalty(const GroupStats& stats, std::size_t n_est, std::size_t n, double p) {
    if (!stats.vars_defined()) {
        throw DegenerateGroup("honest_penalty: variance undefined (arm smaller than 2)");
    }
    if (!(p > 0.0 && p < 1.0)) {
        throw DegenerateGroup("honest_penalty: treated share must lie strictly in (0, 1)");
    }
    const double scale = 1.0 + static_cast<double>(n_est) / static_cast<double>(n);
    return scale * (stats.var_treated / p + stats.var_control / (1.0 - p));
}

// --------------------------------------------------------------------------
// SubsampleScan
// --------------------------------------------------------------------------

SubsampleScan::SubsampleScan(const Dataset& part, const std::vector<std::size_t>& indices) {
    rows_ = indices;
    std::sort(rows_.begin(), rows_.end(), [&](std::size_t a, std::size_t b) {
        const double ta = part.samples[a].treatment;
        const double tb = part.samples[b].treatment;
        return ta != tb ? ta < tb : a < b;
    });
    treatments_.resize(rows_.size());
    centered_.resize(rows_.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        treatments_[i] = part.samples[rows_[i]].treatment;
        centered_[i] = part.samples[rows_[i]].outcome;
        sum += centered_[i];
    }
    center_ = rows_.empty() ? 0.0 : sum / static_cast<double>(rows_.size());
    for (double& y : centered_) y -= center_;
    build_prefix();
}

void SubsampleScan::build_prefix() {
    prefix_sum_.assign(rows_.size() + 1, 0.0);
    prefix_sq_.assign(rows_.size() + 1, 0.0);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        prefix_sum_[i + 1] = prefix_sum_[i] + centered_[i];
        prefix_sq_[i + 1] = prefix_sq_[i] + centered_[i] * centered_[i];
    }
}

GroupStats SubsampleScan::stats_at(double trigger) const {
    const std::size_t n = rows_.size();
    const std::size_t k = static_cast<std::size_t>(
        std::lower_bound(treatments_.begin(), treatments_.end(), trigger) - treatments_.begin());

    GroupStats stats;
    stats.n_control = k;
    stats.n_treated = n - k;

    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double sum0 = prefix_sum_[k];
    const double sum1 = prefix_sum_[n] - prefix_sum_[k];
    stats.mean_control = k ? center_ + sum0 / static_cast<double>(k) : nan;
    stats.mean_treated = (n - k) ? center_ + sum1 / static_cast<double>(n - k) : nan;

    auto var_of = [](double sq, double sum, std::size_t m) {
        const double v = (sq - sum * sum / static_cast<double>(m)) / static_cast<double>(m - 1);
        return v > 0.0 ? v : 0.0;   // guard fp cancellation
    };
    stats.var_control = k >= 2 ? var_of(prefix_sq_[k], sum0, k) : nan;
    stats.var_treated = (n - k) >= 2 ? var_of(prefix_sq_[n] - prefix_sq_[k], sum1, n - k) : nan;
    return stats;
}

SubsampleScan SubsampleScan::filter(const Dataset& part, std::size_t feature, double threshold,
                                    bool keep_left) const {
    SubsampleScan out;
    out.rows_.reserve(rows_.size());
    out.treatments_.reserve(rows_.size());
    out.centered_.reserve(rows_.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const bool left = part.samples[rows_[i]].features[feature] <= threshold;
        if (left == keep_left) {
            out.rows_.push_back(rows_[i]);
            out.treatments_.push_back(treatments_[i]);
            const double y = centered_[i] + center_;
            out.centered_.push_back(y);
            sum += y;
        }
    }
    out.center_ = out.rows_.empty() ? 0.0 : sum / static_cast<double>(out.rows_.size());
    for (double& y : out.centered_) y -= out.center_;
    out.build_prefix();
    return out;
}

// --------------------------------------------------------------------------
// NodeScan and criterion evaluation
// --------------------------------------------------------------------------

NodeScan NodeScan::build(const DataSplit& split, const NodeSample& node,
                         const CriterionConfig& config) {
    NodeScan scan;
    scan.train = SubsampleScan(split.train, node.train_idx);
    scan.val = SubsampleScan(split.validation, node.val_idx);
    // Without a separate estimation part, validation stands in for it.
    scan.est_is_val = config.uses_estimation() && split.estimation.empty();
    if (!scan.est_is_val) scan.est = SubsampleScan(split.estimation, node.est_idx);
    scan.global_train_n = split.train.size();
    scan.global_total_n = split.total_size();
    return scan;
}

NodeScan NodeScan::filter_children(const DataSplit& split, std::size_t feature, double threshold,
                                   bool keep_left) const {
    NodeScan child;
    child.train = train.filter(split.train, feature, threshold, keep_left);
    child.val = val.filter(split.validation, feature, threshold, keep_left);
    child.est_is_val = est_is_val;
    if (!est_is_val) child.est = est.filter(split.estimation, feature, threshold, keep_left);
    child.global_train_n = global_train_n;
    child.global_total_n = global_total_n;
    return child;
}

namespace {

bool arms_at_least(const GroupStats& stats, std::size_t per_arm) {
    return stats.n_treated >= per_arm && stats.n_control >= per_arm;
}

std::optional<double> honest_share(const NodeScan& scan, const CriterionConfig& config,
                                   const GroupStats& train_stats) {
    double p;
    if (config.honest_global_share) {
        if (scan.global_total_n == 0) return std::nullopt;
        p = static_cast<double>(scan.global_train_n) / static_cast<double>(scan.global_total_n);
    } else {
        p = train_stats.treated_share();
    }
    if (!(p > 0.0 && p < 1.0)) return std::nullopt;
    return p;
}

// Sample the leaf-facing effect estimate is computed on: the estimation set
// for honest kinds, validation for the hybrid kind, training otherwise.
const SubsampleScan& estimation_view(const NodeScan& scan, const CriterionConfig& config) {
    if (config.uses_estimation()) return scan.estimation();
    if (config.kind == CriterionKind::HonestVal) return scan.val;
    return scan.train;
}

} // namespace

std::optional<double> criterion_score_at(const NodeScan& scan, const CriterionConfig& config,
                                         double trigger, const ArmRequirements& req) {
    const GroupStats tr = scan.train.stats_at(trigger);
    if (!tr.means_defined() || !arms_at_least(tr, req.train_per_arm)) return std::nullopt;

    const double tau_train = tr.mean_treated - tr.mean_control;
    const double f_train = partition_measure_f(scan.train.size(), tau_train);
    if (config.kind == CriterionKind::Adaptive) return f_train;

    std::optional<GroupStats> va;
    if (config.uses_validation()) {
        va = scan.val.stats_at(trigger);
        if (!arms_at_least(*va, req.val_per_arm)) return std::nullopt;
    }
    if (config.uses_estimation() && req.est_per_arm > 0) {
        if (!arms_at_least(scan.estimation().stats_at(trigger), req.est_per_arm)) return std::nullopt;
    }

    std::optional<double> penalty;
    if (config.uses_honest_penalty()) {
        if (!tr.vars_defined()) return std::nullopt;
        const auto p = honest_share(scan, config, tr);
        if (!p) return std::nullopt;
        const std::size_t n_est =
            config.kind == CriterionKind::HonestVal ? scan.val.size() : scan.estimation().size();
        penalty = honest_penalty(tr, n_est, scan.train.size(), *p);
    }

    if (config.kind == CriterionKind::Honest) return f_train - *penalty;

    // Degenerate validation contributes zero cost; the split is still scored.
    double cost = 0.0;
    if (va->means_defined()) {
        cost = cost_term(scan.val.size(), va->mean_treated - va->mean_control, tau_train);
    }
    const double fc = f_c(f_train, cost, scan.train.size(), scan.val.size(), config.lambda);

    switch (config.kind) {
        case CriterionKind::Learn: return fc;
        case CriterionKind::HonestLearn:
        case CriterionKind::HonestVal: return fc - *penalty;
        default: return std::nullopt;   // unreachable
    }
}

std::optional<double> criterion_score(const DataSplit& split, const NodeSample& node,
                                      const CriterionConfig& config,
                                      std::optional<double> trigger) {
    const NodeScan scan = NodeScan::build(split, node, config);
    const double at = config.trigger_mode && trigger ? *trigger : kBinaryTreatmentThreshold;
    return criterion_score_at(scan, config, at);
}

std::vector<double> trigger_candidates(const std::vector<double>& sorted_treatments,
                                       std::optional<std::size_t> max_candidates) {
    std::vector<double> distinct;
    for (double t : sorted_treatments) {
        if (distinct.empty() || distinct.back() != t) distinct.push_back(t);
    }
    if (!max_candidates || distinct.size() <= *max_candidates) return distinct;

    // Thin to k interior empirical quantiles of the raw values (with
    // multiplicity).  Endpoints are deliberately excluded: a trigger at the
    // minimum or maximum treatment leaves one arm empty and can never win.
    const std::size_t k = *max_candidates;
    const std::size_t n = sorted_treatments.size();
    std::vector<double> picked;
    picked.reserve(k);
    for (std::size_t j = 1; j <= k; ++j) {
        const double v = sorted_treatments[j * n / (k + 1)];
        if (picked.empty() || picked.back() != v) picked.push_back(v);
    }
    return picked;
}

std::optional<TriggerResult> find_trigger(const NodeScan& scan, const CriterionConfig& config,
                                          const ArmRequirements& req) {
    const std::vector<double> candidates =
        trigger_candidates(scan.train.treatments(), config.max_trigger_candidates);
    if (candidates.size() < 2) return std::nullopt;

    std::optional<double> best_score;
    double best_trigger = 0.0;
    for (double theta : candidates) {   // ascending: ties keep the smallest trigger
        const auto score = criterion_score_at(scan, config, theta, req);
        if (score && (!best_score || *score > *best_score)) {
            best_score = score;
            best_trigger = theta;
        }
    }
    if (!best_score) return std::nullopt;

    TriggerResult result;
    result.trigger = best_trigger;
    result.score = *best_score;

    GroupStats stats = estimation_view(scan, config).stats_at(best_trigger);
    if (!stats.means_defined()) stats = scan.train.stats_at(best_trigger);
    result.stats = stats;
    result.ace = stats.mean_treated - stats.mean_control;
    return result;
}

std::optional<TriggerResult> find_trigger(const DataSplit& split, const NodeSample& node,
                                          const CriterionConfig& config) {
    return find_trigger(NodeScan::build(split, node, config), config);
}

std::optional<NodeEvaluation> evaluate_node(const NodeScan& scan, const CriterionConfig& config,
                                            const ArmRequirements& req) {
    NodeEvaluation eval;
    if (config.trigger_mode) {
        const auto found = find_trigger(scan, config, req);
        if (!found) return std::nullopt;
        eval.score = found->score;
        eval.ace = found->ace;
        eval.trigger = found->trigger;
        eval.stats = found->stats;
        return eval;
    }

    const auto score = criterion_score_at(scan, config, kBinaryTreatmentThreshold, req);
    if (!score) return std::nullopt;
    eval.score = *score;

    GroupStats stats = estimation_view(scan, config).stats_at(kBinaryTreatmentThreshold);
    if (!stats.means_defined()) stats = scan.train.stats_at(kBinaryTreatmentThreshold);
    eval.stats = stats;
    eval.ace = stats.mean_treated - stats.mean_control;
    return eval;
}

} // namespace ttree
