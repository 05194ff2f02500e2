#include "agile/forest/export.hpp"

#include "agile/common/json_io.hpp"

namespace agile::forest {

namespace {

void emit_node(std::string& out, const DecisionTree& tree, std::size_t i, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const auto& n = tree.nodes[i];
  if (n.leaf) {
    const char* tally = n.label == Label::Easy ? "easy" : "hard";
    out += pad + tally + " = " + tally + " + 1;\n";
    return;
  }
  out += pad + "if (x[" + std::to_string(n.feature) + "] <= " + format_double(n.threshold) + ") {\n";
  emit_node(out, tree, n.left, indent + 1);
  out += pad + "} else {\n";
  emit_node(out, tree, n.right, indent + 1);
  out += pad + "}\n";
}

} // namespace

std::string export_decision_code(const RandomForest& model) {
  std::string out;
  out += "/* " + std::to_string(model.trees.size()) + " trees, " +
         std::to_string(model.schema.width()) + " features (max_depth " +
         std::to_string(model.schema.max_depth()) + ")";
  if (!model.training_fingerprint.empty()) out += ", training " + model.training_fingerprint;
  out += " */\n";
  out += std::string("int ") + kExportedFunctionName + "(double x[" +
         std::to_string(model.schema.width()) + "], int votes[2]) {\n";
  out += "  int easy = 0;\n";
  out += "  int hard = 0;\n";
  for (const auto& tree : model.trees) emit_node(out, tree, 0, 1);
  out += "  votes[0] = easy;\n";
  out += "  votes[1] = hard;\n";
  out += "  return easy > hard ? 1 : 0;\n";
  out += "}\n";
  return out;
}

} // namespace agile::forest
