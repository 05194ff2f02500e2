#include "agile/forest/model_io.hpp"

#include <fstream>
#include <sstream>

#include "agile/common/json_io.hpp"

namespace agile::forest {

namespace {

Json node_to_json(const TreeNode& n) {
  Json j = Json::object();
  if (n.leaf) {
    j["label"] = std::string(to_string(n.label));
    j["class_counts"] = Json::array({n.class_counts[0], n.class_counts[1]});
  } else {
    j["feature"] = n.feature;
    j["threshold"] = n.threshold;
    j["left"] = n.left;
    j["right"] = n.right;
  }
  return j;
}

[[noreturn]] void fail(const std::string& what) { throw ModelFormatError("model: " + what); }

const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(where + " is not an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(where + " is missing '" + key + "'");
  return *it;
}

std::uint64_t unsigned_field(const Json& obj, const char* key, const std::string& where) {
  const Json& v = field(obj, key, where);
  if (!v.is_number_unsigned()) fail(where + "." + key + " must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

int int_field(const Json& obj, const char* key, const std::string& where) {
  const Json& v = field(obj, key, where);
  if (!v.is_number_integer()) fail(where + "." + key + " must be an integer");
  return v.get<int>();
}

double number_field(const Json& obj, const char* key, const std::string& where) {
  const Json& v = field(obj, key, where);
  if (!v.is_number()) fail(where + "." + key + " must be a number");
  return v.get<double>();
}

DecisionTree tree_from_json(const Json& j, std::size_t width, const std::string& where) {
  const Json& nodes = field(j, "nodes", where);
  if (!nodes.is_array() || nodes.empty()) fail(where + ".nodes must be a nonempty array");
  DecisionTree tree;
  const std::size_t count = nodes.size();
  for (std::size_t i = 0; i < count; ++i) {
    const std::string at = where + ".nodes[" + std::to_string(i) + "]";
    const Json& n = nodes[i];
    TreeNode node;
    if (n.is_object() && n.contains("label")) {
      node.leaf = true;
      const Json& label = n["label"];
      const auto parsed = label.is_string() ? parse_label(label.get<std::string>()) : std::nullopt;
      if (!parsed) fail(at + ".label must be \"easy\" or \"hard\"");
      node.label = *parsed;
      const Json& counts = field(n, "class_counts", at);
      if (!counts.is_array() || counts.size() != 2 || !counts[0].is_number_unsigned() ||
          !counts[1].is_number_unsigned())
        fail(at + ".class_counts must be two nonnegative integers");
      node.class_counts = {counts[0].get<std::uint64_t>(), counts[1].get<std::uint64_t>()};
    } else {
      node.leaf = false;
      node.feature = unsigned_field(n, "feature", at);
      node.threshold = number_field(n, "threshold", at);
      node.left = unsigned_field(n, "left", at);
      node.right = unsigned_field(n, "right", at);
      if (node.feature >= width)
        throw SchemaWidthError("model: " + at + " tests feature " + std::to_string(node.feature) +
                               " but the schema width is " + std::to_string(width));
      // Children after the parent guarantees every walk ends at a leaf.
      if (node.left <= i || node.right <= i || node.left >= count || node.right >= count)
        fail(at + " has child indices out of order or out of range");
    }
    tree.nodes.push_back(node);
  }
  return tree;
}

} // namespace

std::string model_to_text(const RandomForest& model) {
  Json doc = Json::object();
  doc["format_version"] = kModelFormatVersion;
  Json schema = Json::object();
  schema["max_depth"] = model.schema.max_depth();
  schema["layout"] = model.schema.layout();
  doc["schema"] = schema;
  Json params = Json::object();
  params["n_trees"] = model.params.n_trees;
  params["max_tree_depth"] = model.params.max_tree_depth;
  params["min_samples_leaf"] = model.params.min_samples_leaf;
  params["features_per_split"] = model.params.features_per_split;
  params["bootstrap_fraction"] = model.params.bootstrap_fraction;
  params["rng_seed"] = model.params.rng_seed;
  doc["params"] = params;
  doc["training_fingerprint"] = model.training_fingerprint;
  Json trees = Json::array();
  for (const auto& tree : model.trees) {
    Json nodes = Json::array();
    for (const auto& n : tree.nodes) nodes.push_back(node_to_json(n));
    Json t = Json::object();
    t["nodes"] = std::move(nodes);
    trees.push_back(std::move(t));
  }
  doc["trees"] = std::move(trees);
  return canonical_dump(doc, 2) + "\n";
}

RandomForest model_from_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(std::string("not valid JSON (") + e.what() + ")");
  }
  if (!doc.is_object()) fail("document is not an object");
  const Json& version = field(doc, "format_version", "document");
  if (!version.is_number_integer() || version.get<long long>() != kModelFormatVersion)
    throw ModelVersionError("model: unsupported format_version " + version.dump() + " (expected " +
                            std::to_string(kModelFormatVersion) + ")");

  const Json& schema = field(doc, "schema", "document");
  const int max_depth = int_field(schema, "max_depth", "schema");
  if (max_depth < 1) fail("schema.max_depth must be positive");
  RandomForest model;
  model.schema = features::FeatureSchema(max_depth);
  const Json& layout = field(schema, "layout", "schema");
  if (!layout.is_array()) fail("schema.layout must be an array");
  const auto expected = model.schema.layout();
  if (layout.size() != expected.size())
    throw SchemaWidthError("model: schema.layout has " + std::to_string(layout.size()) +
                           " slots but max_depth " + std::to_string(max_depth) + " implies " +
                           std::to_string(expected.size()));
  for (std::size_t i = 0; i < expected.size(); ++i)
    if (!layout[i].is_string() || layout[i].get<std::string>() != expected[i])
      fail("schema.layout[" + std::to_string(i) + "] should be '" + expected[i] + "'");

  const Json& params = field(doc, "params", "document");
  model.params.n_trees = int_field(params, "n_trees", "params");
  model.params.max_tree_depth = int_field(params, "max_tree_depth", "params");
  model.params.min_samples_leaf = int_field(params, "min_samples_leaf", "params");
  model.params.features_per_split = int_field(params, "features_per_split", "params");
  model.params.bootstrap_fraction = number_field(params, "bootstrap_fraction", "params");
  model.params.rng_seed = unsigned_field(params, "rng_seed", "params");
  try {
    model.params.validate(model.schema.width());
  } catch (const std::invalid_argument& e) {
    fail(std::string("invalid params: ") + e.what());
  }

  const Json& fp = field(doc, "training_fingerprint", "document");
  if (!fp.is_string()) fail("training_fingerprint must be a string");
  model.training_fingerprint = fp.get<std::string>();

  const Json& trees = field(doc, "trees", "document");
  if (!trees.is_array()) fail("trees must be an array");
  if (trees.size() != static_cast<std::size_t>(model.params.n_trees))
    fail("expected " + std::to_string(model.params.n_trees) + " trees, found " +
         std::to_string(trees.size()));
  for (std::size_t t = 0; t < trees.size(); ++t)
    model.trees.push_back(
        tree_from_json(trees[t], model.schema.width(), "trees[" + std::to_string(t) + "]"));
  return model;
}

void save_model(const RandomForest& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file " + path.string());
  out << model_to_text(model);
  if (!out) throw std::runtime_error("failed writing model file " + path.string());
}

RandomForest load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_text(buf.str());
}

} // namespace agile::forest
