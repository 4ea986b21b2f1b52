#include "ttree/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "ttree/errors.hpp"
#include "ttree/format.hpp"
#include "ttree/rng.hpp"
#include "ttree/stats.hpp"
#include "ttree/treefile.hpp"

namespace ttree {

namespace {

constexpr double kDefaultAlpha = 0.05;

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw DataError("failed while writing '" + path + "'");
}

Tree load_input_tree(const RunConfig& config) {
    if (!config.tree_path) throw ValidationError("this command needs a tree file (set tree=)");
    return load_tree(*config.tree_path);
}

/// Evaluating or pruning a tree against a dataset only makes sense when the
/// feature columns line up exactly.
void require_matching_features(const Tree& tree, const Dataset& data) {
    if (data.dimension != tree.dimension || data.feature_names != tree.feature_names)
        throw ValidationError("data feature columns do not match the tree's feature columns");
}

LearnerConfig learner_config(const RunConfig& config) {
    LearnerConfig lc;
    lc.criterion = config.criterion;
    lc.min_group_size = config.min_group_size;
    lc.max_depth = config.max_depth;
    lc.min_split_gain = config.min_split_gain;
    return lc;
}

std::string optional_cell(const std::optional<double>& value) {
    return value ? format_double(*value) : std::string("-");
}

void render_effect_report(std::ostringstream& out, const EffectReport& report,
                          const std::string& prefix) {
    out << prefix << "ace_error = " << format_double(report.ace_error) << "\n";
    if (report.unit_smape)
        out << prefix << "unit_smape = " << format_double(*report.unit_smape) << "\n";
    out << prefix << "leaf_variance = " << format_double(report.leaf_variance) << "\n";
    out << prefix << "mahalanobis_balance = " << format_double(report.mahalanobis_balance)
        << "\n";
    out << prefix << "leaves_evaluated = " << report.leaves_evaluated << "\n";
    out << prefix << "leaves_skipped = " << report.leaves_skipped << "\n";
    out << prefix << "balance_leaves = " << report.balance_leaves << "\n";
    out << prefix << "leaf_id\tn_test\tace_stored\tace_test\ttrigger\tp_value\n";
    for (const LeafReport& row : report.per_leaf) {
        out << prefix << row.leaf_id << '\t' << row.n_test << '\t'
            << format_double(row.ace_stored) << '\t' << optional_cell(row.ace_test) << '\t'
            << optional_cell(row.trigger) << '\t' << optional_cell(row.p_value) << "\n";
    }
}

} // namespace

Dataset load_input_data(const RunConfig& config) {
    if (config.data_path && config.synthetic)
        throw ValidationError("set either data= or synthetic=, not both");
    if (config.data_path) {
        ColumnRoles roles;
        roles.features = config.feature_columns;
        roles.treatment = config.treatment_column;
        roles.outcome = config.outcome_column;
        roles.true_effect = config.true_effect_column;
        Dataset data = dataset_from_csv(read_csv_file(*config.data_path), roles);
        for (const std::string& name : config.discrete_columns) {
            const auto it =
                std::find(data.feature_names.begin(), data.feature_names.end(), name);
            if (it == data.feature_names.end())
                throw ValidationError("discrete column '" + name + "' is not a feature column");
            data.feature_kinds[static_cast<std::size_t>(it - data.feature_names.begin())] =
                FeatureKind::Discrete;
        }
        return data;
    }
    if (config.synthetic) return generate(config.planted_model(), config.samples);
    throw ValidationError("no input data configured (set data= or synthetic=)");
}

DataSplit make_split(const Dataset& data, const RunConfig& config) {
    return split_dataset(data, config.validation_fraction, config.estimation_fraction,
                         config.test_fraction, config.seed);
}

Dataset cmd_generate(const RunConfig& config) {
    config.validate();
    if (!config.synthetic)
        throw ValidationError("generate needs a synthetic model (set synthetic=)");
    Dataset data = generate(config.planted_model(), config.samples);
    if (config.output_path) write_csv_file(*config.output_path, dataset_to_csv(data));
    return data;
}

TrainResult cmd_train(const RunConfig& config) {
    config.validate();
    TrainResult result;
    const Dataset data = load_input_data(config);
    result.split = make_split(data, config);
    result.tree = train(result.split, learner_config(config));
    annotate_p_values(result.tree, result.split);
    result.nodes = node_count(*result.tree.root);
    result.leaves = collect_leaves(*result.tree.root).size();
    result.depth = tree_depth(*result.tree.root);
    if (config.output_path) save_tree(result.tree, *config.output_path);
    return result;
}

PruneResult cmd_prune(const RunConfig& config) {
    config.validate();
    PruneResult result;
    result.alpha = config.alpha.value_or(kDefaultAlpha);
    const Tree tree = load_input_tree(config);
    const Dataset data = load_input_data(config);
    require_matching_features(tree, data);
    const DataSplit split = make_split(data, config);
    result.leaves_before = collect_leaves(*tree.root).size();
    result.tree = prune(tree, split, result.alpha);
    result.leaves_after = collect_leaves(*result.tree.root).size();
    if (config.output_path) save_tree(result.tree, *config.output_path);
    return result;
}

CsvTable cmd_predict(const RunConfig& config) {
    config.validate();
    const Tree tree = load_input_tree(config);
    if (!config.data_path) throw ValidationError("predict needs a CSV to score (set data=)");
    const CsvTable input = read_csv_file(*config.data_path);

    std::vector<std::size_t> feature_cols;
    feature_cols.reserve(tree.dimension);
    for (const std::string& name : tree.feature_names) {
        const auto col = input.column(name);
        if (!col)
            throw ValidationError("prediction input is missing feature column '" + name + "'");
        feature_cols.push_back(*col);
    }

    CsvTable output;
    output.headers = tree.feature_names;
    output.headers.push_back("predicted_effect");
    const bool with_trigger = tree.criterion.trigger_mode;
    if (with_trigger) output.headers.push_back("prescribed_trigger");

    std::vector<double> features(tree.dimension);
    for (const auto& row : input.rows) {
        for (std::size_t j = 0; j < feature_cols.size(); ++j) features[j] = row[feature_cols[j]];
        const Prediction prediction = predict(tree, features);
        std::vector<double> out_row = features;
        out_row.push_back(prediction.ace);
        if (with_trigger)
            out_row.push_back(prediction.trigger.value_or(
                std::numeric_limits<double>::quiet_NaN()));
        output.rows.push_back(std::move(out_row));
    }
    if (config.output_path) write_csv_file(*config.output_path, output);
    return output;
}

EvaluateResult cmd_evaluate(const RunConfig& config) {
    config.validate();
    const Tree tree = load_input_tree(config);
    const Dataset data = load_input_data(config);
    require_matching_features(tree, data);
    const DataSplit split = make_split(data, config);
    const Dataset& test = split.test.empty() ? data : split.test;

    EvaluateResult result;
    result.report = evaluate_tree(tree, test);
    if (config.alpha) {
        const Tree pruned = prune(tree, split, *config.alpha);
        result.pruned_report = evaluate_tree(pruned, test);
        result.pruned_leaves = collect_leaves(*pruned.root).size();
    }
    if (config.output_path) write_text_file(*config.output_path, render_report(result));
    return result;
}

TuneResult cmd_tune(const RunConfig& config) {
    config.validate();
    if (config.lambda_grid.empty() || config.rho_grid.empty())
        throw ValidationError("tune needs non-empty lambda_grid and rho_grid");
    const Dataset data = load_input_data(config);
    if (data.size() < config.folds)
        throw ValidationError("tune needs at least one sample per fold");

    std::vector<double> lambdas = config.lambda_grid;
    std::vector<double> rhos = config.rho_grid;
    std::sort(lambdas.begin(), lambdas.end());
    std::sort(rhos.begin(), rhos.end());

    // Deterministic fold assignment: shuffled row order cut into k blocks.
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    Rng fold_rng(substream(config.seed, "tune-folds"));
    fold_rng.shuffle(order);

    const std::size_t k = config.folds;
    std::vector<std::vector<std::size_t>> folds(k);
    for (std::size_t i = 0; i < order.size(); ++i) folds[i % k].push_back(order[i]);

    TuneResult result;
    double best_score = std::numeric_limits<double>::infinity();
    bool have_best = false;

    for (double lambda : lambdas) {
        for (double rho : rhos) {
            double total = 0.0;
            for (std::size_t f = 0; f < k; ++f) {
                std::vector<std::size_t> train_rows;
                train_rows.reserve(data.size() - folds[f].size());
                for (std::size_t g = 0; g < k; ++g)
                    if (g != f)
                        train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
                std::sort(train_rows.begin(), train_rows.end());
                std::vector<std::size_t> test_rows = folds[f];
                std::sort(test_rows.begin(), test_rows.end());

                RunConfig cell = config;
                cell.criterion.lambda = lambda;
                cell.validation_fraction = rho;
                cell.test_fraction = 0.0;
                cell.seed = substream(config.seed, "tune-split", f);
                try {
                    const Dataset train_data = subset(data, train_rows);
                    const DataSplit split = make_split(train_data, cell);
                    const Tree tree = train(split, learner_config(cell));
                    const Dataset test_data = subset(data, test_rows);
                    total +=
                        ace_error(tree, test_data, collect_leaves(std::as_const(*tree.root)))
                            .value;
                } catch (const std::exception&) {
                    total += std::numeric_limits<double>::infinity();
                }
            }
            const double score = total / static_cast<double>(k);
            result.table.push_back({lambda, rho, score});
            // Strict < with ascending iteration implements the tie-break:
            // smaller lambda first, then smaller rho.
            if (!have_best || score < best_score) {
                best_score = score;
                result.best_lambda = lambda;
                result.best_rho = rho;
                have_best = true;
            }
        }
    }
    if (config.output_path) write_text_file(*config.output_path, render_tune_table(result));
    return result;
}

std::string cmd_export_dot(const RunConfig& config) {
    config.validate();
    const Tree tree = load_input_tree(config);
    const std::string dot = export_dot(tree);
    if (config.output_path) write_text_file(*config.output_path, dot);
    return dot;
}

std::string render_train_summary(const TrainResult& result) {
    std::ostringstream out;
    out << "nodes = " << result.nodes << "\n";
    out << "leaves = " << result.leaves << "\n";
    out << "depth = " << result.depth << "\n";
    out << "leaf_id\tn_treated\tn_control\tace\ttrigger\tp_value\n";
    const auto leaves = collect_leaves(*result.tree.root);
    for (std::size_t id = 0; id < leaves.size(); ++id) {
        const TreeNode* leaf = leaves[id];
        out << id << '\t' << leaf->n_treated << '\t' << leaf->n_control << '\t'
            << format_double(leaf->ace) << '\t' << optional_cell(leaf->trigger) << '\t'
            << optional_cell(leaf->p_value) << "\n";
    }
    return out.str();
}

std::string render_report(const EvaluateResult& result) {
    std::ostringstream out;
    render_effect_report(out, result.report, "");
    if (result.pruned_report) {
        out << "pruned_leaves = " << result.pruned_leaves << "\n";
        render_effect_report(out, *result.pruned_report, "pruned_");
    }
    return out.str();
}

std::string render_tune_table(const TuneResult& result) {
    std::ostringstream out;
    out << "best_lambda = " << format_double(result.best_lambda) << "\n";
    out << "best_rho = " << format_double(result.best_rho) << "\n";
    out << "lambda\trho\tace_error\n";
    for (const TuneCell& cell : result.table) {
        out << format_double(cell.lambda) << '\t' << format_double(cell.rho) << '\t'
            << format_double(cell.score) << "\n";
    }
    return out.str();
}

} // namespace ttree
