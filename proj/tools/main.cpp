// Command-line front end: verbs for generating data, training, pruning,
// predicting, evaluating, tuning, and exporting trees. All behavior lives in
// the core library; this file only maps flags onto RunConfig keys.

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "ttree/commands.hpp"
#include "ttree/errors.hpp"
#include "ttree/runconfig.hpp"

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

// Every flag feeds the same key=value channel as the config file, applied in
// command-line order after the file so flags win.
void add_config_flags(CLI::App* cmd, Overrides& overrides) {
    static const std::vector<std::pair<const char*, const char*>> kFlags = {
        {"--data", "data"},
        {"--synthetic", "synthetic"},
        {"--samples", "samples"},
        {"--dimension", "dimension"},
        {"--noise-sd", "noise_sd"},
        {"--treatment-min", "treatment_min"},
        {"--treatment-max", "treatment_max"},
        {"--baseline-intercept", "baseline_intercept"},
        {"--baseline-coefs", "baseline_coefs"},
        {"--subgroup", "subgroup"},
        {"--feature-columns", "feature_columns"},
        {"--treatment-column", "treatment_column"},
        {"--outcome-column", "outcome_column"},
        {"--true-effect-column", "true_effect_column"},
        {"--discrete-columns", "discrete_columns"},
        {"--criterion", "criterion"},
        {"--lambda", "lambda"},
        {"--trigger-mode", "trigger_mode"},
        {"--max-trigger-candidates", "max_trigger_candidates"},
        {"--honest-global-share", "honest_global_share"},
        {"--validation-fraction", "validation_fraction"},
        {"--rho", "rho"},
        {"--estimation-fraction", "estimation_fraction"},
        {"--test-fraction", "test_fraction"},
        {"--min-group-size", "min_group_size"},
        {"--max-depth", "max_depth"},
        {"--min-split-gain", "min_split_gain"},
        {"--alpha", "alpha"},
        {"--seed", "seed"},
        {"--lambda-grid", "lambda_grid"},
        {"--rho-grid", "rho_grid"},
        {"--folds", "folds"},
        {"--tree", "tree"},
        {"--out", "out"},
    };
    for (const auto& [flag, key] : kFlags) {
        const std::string key_name = key;
        cmd->add_option_function<std::string>(
               flag,
               [&overrides, key_name](const std::string& value) {
                   overrides.emplace_back(key_name, value);
               },
               std::string("sets config key ") + key_name)
            ->take_all();
    }
}

ttree::RunConfig build_config(const std::string& config_path, const Overrides& overrides) {
    ttree::RunConfig config;
    if (!config_path.empty()) config = ttree::load_run_config(config_path);
    for (const auto& [key, value] : overrides) ttree::apply_config_entry(config, key, value);
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trigger-based causal trees: subgroup discovery with per-group "
                 "treatment thresholds"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides overrides;

    auto make_command = [&](const char* name, const char* description) {
        CLI::App* cmd = app.add_subcommand(name, description);
        cmd->add_option("--config", config_path, "key=value configuration file");
        add_config_flags(cmd, overrides);
        return cmd;
    };

    CLI::App* generate =
        make_command("generate", "Sample a synthetic benchmark dataset and write it as CSV");
    CLI::App* train = make_command("train", "Train a tree and write the tree file");
    CLI::App* prune =
        make_command("prune", "Collapse splits whose leaf effects are not significant");
    CLI::App* predict =
        make_command("predict", "Per-row effect and trigger predictions for a CSV");
    CLI::App* evaluate = make_command("evaluate", "Held-out effect metrics for a tree");
    CLI::App* tune =
        make_command("tune", "Cross-validate a lambda/rho grid and report the best cell");
    CLI::App* export_dot = make_command("export-dot", "Render a tree file as Graphviz DOT");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2; // bad usage is a validation error
    }

    try {
        const ttree::RunConfig config = build_config(config_path, overrides);
        if (*generate) {
            const ttree::Dataset data = ttree::cmd_generate(config);
            std::cout << "generated " << data.size() << " samples ("
                      << (config.output_path ? *config.output_path : std::string("not written"))
                      << ")\n";
        } else if (*train) {
            const ttree::TrainResult result = ttree::cmd_train(config);
            std::cout << ttree::render_train_summary(result);
        } else if (*prune) {
            const ttree::PruneResult result = ttree::cmd_prune(config);
            std::cout << "alpha = " << result.alpha << "\n"
                      << "leaves_before = " << result.leaves_before << "\n"
                      << "leaves_after = " << result.leaves_after << "\n";
        } else if (*predict) {
            const ttree::CsvTable table = ttree::cmd_predict(config);
            if (config.output_path)
                std::cout << "predicted " << table.rows.size() << " rows (" << *config.output_path
                          << ")\n";
            else
                ttree::write_csv(std::cout, table);
        } else if (*evaluate) {
            const ttree::EvaluateResult result = ttree::cmd_evaluate(config);
            std::cout << ttree::render_report(result);
        } else if (*tune) {
            const ttree::TuneResult result = ttree::cmd_tune(config);
            std::cout << ttree::render_tune_table(result);
        } else if (*export_dot) {
            const std::string dot = ttree::cmd_export_dot(config);
            if (config.output_path)
                std::cout << "wrote " << *config.output_path << "\n";
            else
                std::cout << dot;
        }
        return 0;
    } catch (const ttree::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
