#pragma once

#include <string>

#include "ttree/learner.hpp"

namespace ttree {

/// Tree file: versioned JSON text, one object per node with children nested.
/// Doubles are written in round-trip form; a node score of -infinity (node
/// too small for its criterion) is stored as null.
std::string tree_to_json(const Tree& tree);
Tree tree_from_json(const std::string& text, const std::string& source_name = "<string>");

void save_tree(const Tree& tree, const std::string& path);
Tree load_tree(const std::string& path);

/// Whole-tree equality: metadata, criterion, and node-by-node values.
bool trees_equal(const Tree& a, const Tree& b);

/// Graphviz rendering: one DOT node per tree node, internal nodes labeled
/// with their split rule, leaves with (ACE, trigger, n, p). Leaf fill color
/// shades monotonically with the effect (blue negative, red positive).
std::string export_dot(const Tree& tree);

} // namespace ttree
