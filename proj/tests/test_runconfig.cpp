#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>

#include "helpers.hpp"
#include "ttree/errors.hpp"
#include "ttree/runconfig.hpp"

using namespace ttree;

TEST_CASE("parse_run_config reads key = value lines with comments") {
    RunConfig c = parse_run_config(
        "# a comment line\n"
        "synthetic = default\n"
        "samples = 1500\n"
        "noise_sd = 0.25   # trailing comment\n"
        "\n"
        "criterion = honest-learn\n"
        "lambda = 0.75\n"
        "validation_fraction = 0.3\n"
        "estimation_fraction = 0.2\n"
        "max_depth = 4\n"
        "alpha = 0.05\n"
        "seed = 42\n"
        "lambda_grid = 0.0, 0.5, 1.0\n"
        "rho_grid = 0.2,0.4\n"
        "out = result.csv\n");
    CHECK(c.synthetic == "default");
    CHECK(c.samples == 1500);
    CHECK(c.noise_sd == 0.25);
    CHECK(c.criterion.kind == CriterionKind::HonestLearn);
    CHECK(c.criterion.lambda == 0.75);
    CHECK(c.validation_fraction == 0.3);
    CHECK(c.estimation_fraction == 0.2);
    CHECK(c.max_depth == std::size_t{4});
    CHECK(c.alpha == 0.05);
    CHECK(c.seed == 42);
    CHECK(c.lambda_grid == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(c.rho_grid == std::vector<double>{0.2, 0.4});
    CHECK(c.output_path == "result.csv");
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("parse_run_config diagnostics carry the source and line number") {
    auto message = [](const std::string& text) {
        try {
            parse_run_config(text, "run.cfg");
        } catch (const ValidationError& e) {
            return std::string(e.what());
        }
        return std::string("<no error>");
    };
    CHECK(message("samples = 10\nbroken line\n").find("run.cfg: line 2") != std::string::npos);
    CHECK(message("mystery = 1\n").find("unknown config key 'mystery'") != std::string::npos);
    CHECK(message("samples = abc\n").find("'abc'") != std::string::npos);
    CHECK(message("= 5\n").find("empty key") != std::string::npos);
    CHECK(message("synthetic = sometimes\n").find("'default' or 'custom'") != std::string::npos);
    CHECK_THROWS_AS(load_run_config("/nonexistent/run.cfg"), ValidationError);
}

TEST_CASE("aliases and resets: rho, max_depth none, candidate cap none") {
    RunConfig c;
    apply_config_entry(c, "rho", "0.4");
    CHECK(c.validation_fraction == 0.4);

    apply_config_entry(c, "max_depth", "3");
    CHECK(c.max_depth == std::size_t{3});
    apply_config_entry(c, "max_depth", "none");
    CHECK_FALSE(c.max_depth.has_value());

    apply_config_entry(c, "max_trigger_candidates", "25");
    CHECK(c.criterion.max_trigger_candidates == std::size_t{25});
    apply_config_entry(c, "max_trigger_candidates", "none");
    CHECK_FALSE(c.criterion.max_trigger_candidates.has_value());

    apply_config_entry(c, "trigger_mode", "false");
    CHECK_FALSE(c.criterion.trigger_mode);
    apply_config_entry(c, "trigger_mode", "yes");
    CHECK(c.criterion.trigger_mode);
    CHECK_THROWS_AS(apply_config_entry(c, "trigger_mode", "maybe"), ValidationError);
}

TEST_CASE("parse_subgroup grammar: intervals, infinities, required tokens") {
    Subgroup g = parse_subgroup("f0:[-inf,0.5) trigger:3 effect:1", 2);
    CHECK(g.region[0].lo == -std::numeric_limits<double>::infinity());
    CHECK(g.region[0].hi == 0.5);
    CHECK(g.region[1].lo == -std::numeric_limits<double>::infinity());   // unconstrained
    CHECK(g.region[1].hi == std::numeric_limits<double>::infinity());
    CHECK(g.trigger == 3.0);
    CHECK(g.effect == 1.0);

    Subgroup h = parse_subgroup("trigger:7 f1:[0.25,inf) effect:-1.5", 2);
    CHECK(h.region[1].lo == 0.25);
    CHECK(h.effect == -1.5);

    CHECK_THROWS_AS(parse_subgroup("f0:[0,1) effect:1", 1), ValidationError);     // no trigger
    CHECK_THROWS_AS(parse_subgroup("f0:[0,1) trigger:3", 1), ValidationError);    // no effect
    CHECK_THROWS_AS(parse_subgroup("f5:[0,1) trigger:3 effect:1", 2), ValidationError);
    CHECK_THROWS_AS(parse_subgroup("f0:(0,1) trigger:3 effect:1", 1), ValidationError);
    CHECK_THROWS_AS(parse_subgroup("f0:[0;1) trigger:3 effect:1", 1), ValidationError);
    CHECK_THROWS_AS(parse_subgroup("what:ever trigger:3 effect:1", 1), ValidationError);
}

TEST_CASE("validate enforces fractions, folds, grids, and sizes") {
    auto base = [] {
        RunConfig c;
        c.synthetic = "default";
        return c;
    };

    RunConfig frac = base();
    frac.validation_fraction = 1.0;
    CHECK_THROWS_AS(frac.validate(), ValidationError);

    RunConfig sum = base();
    sum.validation_fraction = 0.5;
    sum.estimation_fraction = 0.3;
    sum.test_fraction = 0.2;   // sums to 1: no training data left
    CHECK_THROWS_AS(sum.validate(), ValidationError);

    RunConfig folds = base();
    folds.folds = 1;
    CHECK_THROWS_AS(folds.validate(), ValidationError);

    RunConfig grid = base();
    grid.rho_grid = {0.0};
    CHECK_THROWS_AS(grid.validate(), ValidationError);
    grid.rho_grid = {0.5};
    grid.lambda_grid = {1.5};
    CHECK_THROWS_AS(grid.validate(), ValidationError);

    RunConfig mgs = base();
    mgs.min_group_size = 0;
    CHECK_THROWS_AS(mgs.validate(), ValidationError);

    RunConfig gain = base();
    gain.min_split_gain = -1.0;
    CHECK_THROWS_AS(gain.validate(), ValidationError);

    RunConfig alpha = base();
    alpha.alpha = 1.5;
    CHECK_THROWS_AS(alpha.validate(), ValidationError);

    RunConfig none = base();
    none.samples = 0;
    CHECK_THROWS_AS(none.validate(), ValidationError);
}

TEST_CASE("planted_model materializes default and custom descriptions") {
    RunConfig missing;
    CHECK_THROWS_AS(missing.planted_model(), ValidationError);

    RunConfig def;
    def.synthetic = "default";
    def.seed = 99;
    def.noise_sd = 0.7;
    PlantedModel dm = def.planted_model();
    CHECK(dm.seed == 99);
    CHECK(dm.noise_sd == 0.7);          // config noise overrides the default
    CHECK(dm.subgroups.size() == 2);

    RunConfig custom;
    custom.synthetic = "custom";
    custom.dimension = 1;
    custom.treatment_min = 0.0;
    custom.treatment_max = 4.0;
    custom.noise_sd = 0.0;
    custom.baseline_intercept = 1.0;
    custom.baseline_coefs = {2.0};
    custom.subgroup_specs = {"f0:[-inf,0.5) trigger:1 effect:2",
                             "f0:[0.5,inf) trigger:3 effect:-2"};
    PlantedModel cm = custom.planted_model();
    CHECK(cm.dimension == 1);
    CHECK(cm.subgroups[1].trigger == 3.0);
    CHECK(cm.baseline({0.25}) == doctest::Approx(1.5));
    CHECK_NOTHROW(cm.validate());

    // A malformed custom model fails at materialization time.
    custom.subgroup_specs.pop_back();   // leaves a coverage gap
    CHECK_THROWS_AS(custom.planted_model(), ValidationError);
}
