#include "ttree/treefile.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ttree/errors.hpp"
#include "ttree/format.hpp"

namespace ttree {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kFormatVersion = "1";
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

ordered_json node_to_json(const TreeNode& node) {
    ordered_json j;
    if (std::isfinite(node.score))
        j["score"] = node.score;
    else
        j["score"] = nullptr;
    j["ace"] = node.ace;
    if (node.trigger)
        j["trigger"] = *node.trigger;
    else
        j["trigger"] = nullptr;
    j["n_treated"] = node.n_treated;
    j["n_control"] = node.n_control;
    if (node.p_value)
        j["p_value"] = *node.p_value;
    else
        j["p_value"] = nullptr;
    j["depth"] = node.depth;
    if (!node.is_leaf()) {
        j["rule"] = ordered_json{{"feature", node.rule->feature},
                                 {"threshold", node.rule->threshold}};
        j["left"] = node_to_json(*node.left);
        j["right"] = node_to_json(*node.right);
    }
    return j;
}

[[noreturn]] void corrupt(const std::string& source, const std::string& why) {
    throw DataError(source + ": corrupt tree file: " + why);
}

double require_finite(const ordered_json& j, const char* key, const std::string& source) {
    if (!j.contains(key) || !j.at(key).is_number())
        corrupt(source, std::string("missing numeric field '") + key + "'");
    const double v = j.at(key).get<double>();
    if (!std::isfinite(v)) corrupt(source, std::string("field '") + key + "' is not finite");
    return v;
}

std::unique_ptr<TreeNode> node_from_json(const ordered_json& j, std::size_t dimension,
                                         std::size_t depth, const std::string& source) {
    if (!j.is_object()) corrupt(source, "node is not an object");
    auto node = std::make_unique<TreeNode>();
    node->depth = depth;

    if (!j.contains("score")) corrupt(source, "missing field 'score'");
    if (j.at("score").is_null())
        node->score = kNegInf;
    else if (j.at("score").is_number())
        node->score = j.at("score").get<double>();
    else
        corrupt(source, "field 'score' must be a number or null");

    node->ace = require_finite(j, "ace", source);

    if (j.contains("trigger") && !j.at("trigger").is_null()) {
        if (!j.at("trigger").is_number()) corrupt(source, "field 'trigger' must be a number");
        node->trigger = j.at("trigger").get<double>();
    }
    if (!j.contains("n_treated") || !j.at("n_treated").is_number_unsigned())
        corrupt(source, "missing count field 'n_treated'");
    if (!j.contains("n_control") || !j.at("n_control").is_number_unsigned())
        corrupt(source, "missing count field 'n_control'");
    node->n_treated = j.at("n_treated").get<std::size_t>();
    node->n_control = j.at("n_control").get<std::size_t>();

    if (j.contains("p_value") && !j.at("p_value").is_null()) {
        if (!j.at("p_value").is_number()) corrupt(source, "field 'p_value' must be a number");
        const double p = j.at("p_value").get<double>();
        if (!(p >= 0.0 && p <= 1.0)) corrupt(source, "p_value outside [0, 1]");
        node->p_value = p;
    }

    const bool has_rule = j.contains("rule") && !j.at("rule").is_null();
    const bool has_children = j.contains("left") || j.contains("right");
    if (has_rule != has_children)
        corrupt(source, "split rule and children must appear together");
    if (has_rule) {
        const ordered_json& rule = j.at("rule");
        if (!rule.is_object() || !rule.contains("feature") ||
            !rule.at("feature").is_number_unsigned() || !rule.contains("threshold") ||
            !rule.at("threshold").is_number())
            corrupt(source, "malformed split rule");
        SplitRule parsed;
        parsed.feature = rule.at("feature").get<std::size_t>();
        parsed.threshold = rule.at("threshold").get<double>();
        if (parsed.feature >= dimension)
            corrupt(source, "split feature index " + std::to_string(parsed.feature) +
                                " out of range for dimension " + std::to_string(dimension));
        if (!std::isfinite(parsed.threshold)) corrupt(source, "split threshold is not finite");
        if (!j.contains("left") || !j.contains("right"))
            corrupt(source, "internal node is missing a child");
        node->rule = parsed;
        node->left = node_from_json(j.at("left"), dimension, depth + 1, source);
        node->right = node_from_json(j.at("right"), dimension, depth + 1, source);
    }
    return node;
}

ordered_json criterion_to_json(const CriterionConfig& c) {
    ordered_json j;
    j["kind"] = to_string(c.kind);
    j["lambda"] = c.lambda;
    j["trigger_mode"] = c.trigger_mode;
    if (c.max_trigger_candidates)
        j["max_trigger_candidates"] = *c.max_trigger_candidates;
    else
        j["max_trigger_candidates"] = nullptr;
    j["honest_global_share"] = c.honest_global_share;
    return j;
}

CriterionConfig criterion_from_json(const ordered_json& j, const std::string& source) {
    if (!j.is_object()) corrupt(source, "criterion is not an object");
    CriterionConfig c;
    if (!j.contains("kind") || !j.at("kind").is_string())
        corrupt(source, "criterion is missing its kind");
    c.kind = criterion_kind_from_string(j.at("kind").get<std::string>());
    c.lambda = require_finite(j, "lambda", source);
    if (!j.contains("trigger_mode") || !j.at("trigger_mode").is_boolean())
        corrupt(source, "criterion is missing trigger_mode");
    c.trigger_mode = j.at("trigger_mode").get<bool>();
    if (j.contains("max_trigger_candidates") && !j.at("max_trigger_candidates").is_null()) {
        if (!j.at("max_trigger_candidates").is_number_unsigned())
            corrupt(source, "max_trigger_candidates must be a count");
        c.max_trigger_candidates = j.at("max_trigger_candidates").get<std::size_t>();
    }
    if (j.contains("honest_global_share")) {
        if (!j.at("honest_global_share").is_boolean())
            corrupt(source, "honest_global_share must be boolean");
        c.honest_global_share = j.at("honest_global_share").get<bool>();
    }
    c.validate();
    return c;
}

} // namespace

std::string tree_to_json(const Tree& tree) {
    if (!tree.root) throw ValidationError("cannot serialize an empty tree");
    ordered_json j;
    j["format_version"] = kFormatVersion;
    j["dimension"] = tree.dimension;
    j["feature_names"] = tree.feature_names;
    j["criterion"] = criterion_to_json(tree.criterion);
    j["root"] = node_to_json(*tree.root);
    return j.dump(2) + "\n";
}

Tree tree_from_json(const std::string& text, const std::string& source_name) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(source_name + ": not valid JSON: " + e.what());
    }
    if (!j.is_object()) corrupt(source_name, "top level is not an object");
    if (!j.contains("format_version") || !j.at("format_version").is_string() ||
        j.at("format_version").get<std::string>() != kFormatVersion)
        corrupt(source_name, "unsupported or missing format_version (expected \"1\")");
    if (!j.contains("dimension") || !j.at("dimension").is_number_unsigned())
        corrupt(source_name, "missing dimension");

    Tree tree;
    tree.dimension = j.at("dimension").get<std::size_t>();
    if (tree.dimension == 0) corrupt(source_name, "dimension must be >= 1");
    if (!j.contains("feature_names") || !j.at("feature_names").is_array())
        corrupt(source_name, "missing feature_names");
    for (const auto& name : j.at("feature_names")) {
        if (!name.is_string()) corrupt(source_name, "feature names must be strings");
        tree.feature_names.push_back(name.get<std::string>());
    }
    if (tree.feature_names.size() != tree.dimension)
        corrupt(source_name, "feature_names length does not match dimension");
    if (!j.contains("criterion")) corrupt(source_name, "missing criterion");
    tree.criterion = criterion_from_json(j.at("criterion"), source_name);
    if (!j.contains("root")) corrupt(source_name, "missing root node");
    tree.root = node_from_json(j.at("root"), tree.dimension, 0, source_name);
    return tree;
}

void save_tree(const Tree& tree, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << tree_to_json(tree);
    if (!out) throw DataError("failed while writing '" + path + "'");
}

Tree load_tree(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return tree_from_json(buffer.str(), path);
}

bool trees_equal(const Tree& a, const Tree& b) {
    if (a.dimension != b.dimension || a.feature_names != b.feature_names) return false;
    const CriterionConfig& ca = a.criterion;
    const CriterionConfig& cb = b.criterion;
    if (ca.kind != cb.kind || ca.lambda != cb.lambda || ca.trigger_mode != cb.trigger_mode ||
        ca.max_trigger_candidates != cb.max_trigger_candidates ||
        ca.honest_global_share != cb.honest_global_share)
        return false;
    if (!a.root || !b.root) return !a.root && !b.root;
    return trees_equal(*a.root, *b.root);
}

namespace {

std::string escape_label(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

/// White at zero effect, saturating toward red (positive) or blue (negative).
std::string leaf_color(double ace, double max_abs) {
    const double fraction = max_abs > 0.0 ? std::fabs(ace) / max_abs : 0.0;
    const int from[3] = {255, 255, 255};
    const int to_pos[3] = {214, 69, 57};
    const int to_neg[3] = {49, 119, 184};
    const int* to = ace >= 0.0 ? to_pos : to_neg;
    char buffer[8];
    std::snprintf(buffer, sizeof(buffer), "#%02x%02x%02x",
                  static_cast<int>(std::lround(from[0] + fraction * (to[0] - from[0]))),
                  static_cast<int>(std::lround(from[1] + fraction * (to[1] - from[1]))),
                  static_cast<int>(std::lround(from[2] + fraction * (to[2] - from[2]))));
    return buffer;
}

void dot_nodes(const Tree& tree, const TreeNode& node, std::size_t& next_id, double max_abs,
               std::ostringstream& out) {
    const std::size_t id = next_id++;
    if (node.is_leaf()) {
        std::string label = "ACE " + format_double(node.ace);
        if (node.trigger) label += "\\ntrigger " + format_double(*node.trigger);
        label += "\\nn=" + std::to_string(node.n_treated + node.n_control);
        if (node.p_value) label += "\\np=" + format_double(*node.p_value);
        out << "  n" << id << " [label=\"" << label << "\", fillcolor=\""
            << leaf_color(node.ace, max_abs) << "\"];\n";
        return;
    }
    const std::string name = escape_label(tree.feature_names[node.rule->feature]);
    out << "  n" << id << " [label=\"" << name << " <= " << format_double(node.rule->threshold)
        << "\", fillcolor=\"#ffffff\"];\n";
    const std::size_t left_id = next_id;
    dot_nodes(tree, *node.left, next_id, max_abs, out);
    const std::size_t right_id = next_id;
    dot_nodes(tree, *node.right, next_id, max_abs, out);
    out << "  n" << id << " -> n" << left_id << ";\n";
    out << "  n" << id << " -> n" << right_id << ";\n";
}

} // namespace

std::string export_dot(const Tree& tree) {
    if (!tree.root) throw ValidationError("cannot render an empty tree");
    double max_abs = 0.0;
    for (const TreeNode* leaf : collect_leaves(*tree.root))
        max_abs = std::max(max_abs, std::fabs(leaf->ace));

    std::ostringstream out;
    out << "digraph tree {\n";
    out << "  node [shape=box, style=filled, fontname=\"Helvetica\"];\n";
    std::size_t next_id = 0;
    dot_nodes(tree, *tree.root, next_id, max_abs, out);
    out << "}\n";
    return out.str();
}

} // namespace ttree
