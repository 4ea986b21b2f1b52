#include "ttree/runconfig.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ttree/errors.hpp"

namespace ttree {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::string::size_type start = 0;
    while (start <= value.size()) {
        const auto comma = value.find(',', start);
        const std::string item =
            trim(comma == std::string::npos ? value.substr(start)
                                            : value.substr(start, comma - start));
        if (!item.empty()) items.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return items;
}

double parse_double(const std::string& key, const std::string& value) {
    if (value == "inf" || value == "+inf") return std::numeric_limits<double>::infinity();
    if (value == "-inf") return -std::numeric_limits<double>::infinity();
    double out = 0.0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    const auto result = std::from_chars(begin, end, out);
    if (result.ec != std::errc{} || result.ptr != end)
        throw ValidationError("config key '" + key + "': cannot parse '" + value +
                              "' as a number");
    return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    const auto result = std::from_chars(begin, end, out);
    if (result.ec != std::errc{} || result.ptr != end)
        throw ValidationError("config key '" + key + "': cannot parse '" + value +
                              "' as a non-negative integer");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ValidationError("config key '" + key + "': cannot parse '" + value +
                          "' as a boolean");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const std::string& item : split_list(value)) out.push_back(parse_double(key, item));
    return out;
}

} // namespace

Subgroup parse_subgroup(const std::string& spec, std::size_t dimension) {
    Subgroup group;
    group.region.assign(dimension, Interval{});
    bool saw_trigger = false;
    bool saw_effect = false;

    std::istringstream tokens(spec);
    std::string token;
    while (tokens >> token) {
        const auto colon = token.find(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 >= token.size())
            throw ValidationError("subgroup token '" + token + "' is not name:value");
        const std::string name = token.substr(0, colon);
        const std::string value = token.substr(colon + 1);

        if (name == "trigger") {
            group.trigger = parse_double("subgroup trigger", value);
            saw_trigger = true;
        } else if (name == "effect") {
            group.effect = parse_double("subgroup effect", value);
            saw_effect = true;
        } else if (name.size() >= 2 && name[0] == 'f') {
            const std::uint64_t feature = parse_uint("subgroup feature", name.substr(1));
            if (feature >= dimension)
                throw ValidationError("subgroup feature f" + std::to_string(feature) +
                                      " out of range for dimension " +
                                      std::to_string(dimension));
            if (value.size() < 5 || value.front() != '[' || value.back() != ')')
                throw ValidationError("subgroup interval '" + value +
                                      "' must have the form [lo,hi)");
            const std::string body = value.substr(1, value.size() - 2);
            const auto comma = body.find(',');
            if (comma == std::string::npos)
                throw ValidationError("subgroup interval '" + value + "' needs two bounds");
            Interval interval;
            interval.lo = parse_double("subgroup bound", trim(body.substr(0, comma)));
            interval.hi = parse_double("subgroup bound", trim(body.substr(comma + 1)));
            group.region[feature] = interval;
        } else {
            throw ValidationError("unknown subgroup token '" + token + "'");
        }
    }
    if (!saw_trigger || !saw_effect)
        throw ValidationError("subgroup '" + spec + "' needs trigger: and effect: tokens");
    return group;
}

void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value) {
    if (key == "data") {
        config.data_path = value;
    } else if (key == "synthetic") {
        if (value != "default" && value != "custom")
            throw ValidationError("config key 'synthetic' must be 'default' or 'custom'");
        config.synthetic = value;
    } else if (key == "samples") {
        config.samples = static_cast<std::size_t>(parse_uint(key, value));
    } else if (key == "dimension") {
        config.dimension = static_cast<std::size_t>(parse_uint(key, value));
    } else if (key == "noise_sd") {
        config.noise_sd = parse_double(key, value);
    } else if (key == "treatment_min") {
        config.treatment_min = parse_double(key, value);
    } else if (key == "treatment_max") {
        config.treatment_max = parse_double(key, value);
    } else if (key == "baseline_intercept") {
        config.baseline_intercept = parse_double(key, value);
    } else if (key == "baseline_coefs") {
        config.baseline_coefs = parse_double_list(key, value);
    } else if (key == "subgroup") {
        config.subgroup_specs.push_back(value);
    } else if (key == "feature_columns") {
        config.feature_columns = split_list(value);
    } else if (key == "treatment_column") {
        config.treatment_column = value;
    } else if (key == "outcome_column") {
        config.outcome_column = value;
    } else if (key == "true_effect_column") {
        config.true_effect_column = value;
    } else if (key == "discrete_columns") {
        config.discrete_columns = split_list(value);
    } else if (key == "criterion") {
        config.criterion.kind = criterion_kind_from_string(value);
    } else if (key == "lambda") {
        config.criterion.lambda = parse_double(key, value);
    } else if (key == "trigger_mode") {
        config.criterion.trigger_mode = parse_bool(key, value);
    } else if (key == "max_trigger_candidates") {
        if (value == "none")
            config.criterion.max_trigger_candidates.reset();
        else
            config.criterion.max_trigger_candidates =
                static_cast<std::size_t>(parse_uint(key, value));
    } else if (key == "honest_global_share") {
        config.criterion.honest_global_share = parse_bool(key, value);
    } else if (key == "validation_fraction" || key == "rho") {
        config.validation_fraction = parse_double(key, value);
    } else if (key == "estimation_fraction") {
        config.estimation_fraction = parse_double(key, value);
    } else if (key == "test_fraction") {
        config.test_fraction = parse_double(key, value);
    } else if (key == "min_group_size") {
        config.min_group_size = static_cast<std::size_t>(parse_uint(key, value));
    } else if (key == "max_depth") {
        if (value == "none")
            config.max_depth.reset();
        else
            config.max_depth = static_cast<std::size_t>(parse_uint(key, value));
    } else if (key == "min_split_gain") {
        config.min_split_gain = parse_double(key, value);
    } else if (key == "alpha") {
        config.alpha = parse_double(key, value);
    } else if (key == "seed") {
        config.seed = parse_uint(key, value);
    } else if (key == "lambda_grid") {
        config.lambda_grid = parse_double_list(key, value);
    } else if (key == "rho_grid") {
        config.rho_grid = parse_double_list(key, value);
    } else if (key == "folds") {
        config.folds = static_cast<std::size_t>(parse_uint(key, value));
    } else if (key == "tree") {
        config.tree_path = value;
    } else if (key == "out") {
        config.output_path = value;
    } else {
        throw ValidationError("unknown config key '" + key + "'");
    }
}

RunConfig parse_run_config(const std::string& text, const std::string& source_name) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(source_name + ": line " + std::to_string(line_no) +
                                  ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ValidationError(source_name + ": line " + std::to_string(line_no) +
                                  ": empty key");
        try {
            apply_config_entry(config, key, value);
        } catch (const ValidationError& e) {
            throw ValidationError(source_name + ": line " + std::to_string(line_no) + ": " +
                                  e.what());
        }
    }
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str(), path);
}

void RunConfig::validate() const {
    criterion.validate();
    auto check_fraction = [](const char* name, double v) {
        if (!(v >= 0.0 && v < 1.0))
            throw ValidationError(std::string(name) + " must lie in [0, 1)");
    };
    check_fraction("validation_fraction", validation_fraction);
    check_fraction("estimation_fraction", estimation_fraction);
    check_fraction("test_fraction", test_fraction);
    if (validation_fraction + estimation_fraction + test_fraction >= 1.0)
        throw ValidationError("validation/estimation/test fractions must leave training data");
    if (min_group_size == 0) throw ValidationError("min_group_size must be at least 1");
    if (!(min_split_gain >= 0.0) || !std::isfinite(min_split_gain))
        throw ValidationError("min_split_gain must be finite and non-negative");
    if (alpha && !(*alpha >= 0.0 && *alpha <= 1.0))
        throw ValidationError("alpha must lie in [0, 1]");
    if (folds < 2) throw ValidationError("folds must be at least 2");
    if (samples == 0) throw ValidationError("samples must be at least 1");
    if (synthetic) {
        if (dimension == 0) throw ValidationError("dimension must be at least 1");
        if (!(treatment_min < treatment_max))
            throw ValidationError("treatment_min must be below treatment_max");
        if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd))
            throw ValidationError("noise_sd must be finite and non-negative");
    }
    for (double lambda : lambda_grid)
        if (!(lambda >= 0.0 && lambda <= 1.0))
            throw ValidationError("lambda_grid values must lie in [0, 1]");
    for (double rho : rho_grid)
        if (!(rho > 0.0 && rho < 1.0))
            throw ValidationError("rho_grid values must lie in (0, 1)");
}

PlantedModel RunConfig::planted_model() const {
    if (!synthetic)
        throw ValidationError("no synthetic model configured (set synthetic = default|custom)");
    if (*synthetic == "default") {
        PlantedModel model = default_benchmark_model(seed);
        model.noise_sd = noise_sd;
        return model;
    }
    PlantedModel model;
    model.dimension = dimension;
    model.baseline_intercept = baseline_intercept;
    model.baseline_coefs = baseline_coefs;
    model.noise_sd = noise_sd;
    model.treatment_min = treatment_min;
    model.treatment_max = treatment_max;
    model.seed = seed;
    for (const std::string& spec : subgroup_specs)
        model.subgroups.push_back(parse_subgroup(spec, dimension));
    model.validate();
    return model;
}

} // namespace ttree
