#include "agile/cli/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "agile/common/hash.hpp"

namespace agile::cli {

void CorpusManifest::validate() const {
  std::set<std::string> ids;
  for (const auto& row : rows) {
    const std::string at = "manifest row '" + row.function_id + "'";
    if (row.function_id.empty()) throw ManifestError("manifest row without function_id");
    if (!ids.insert(row.function_id).second) throw ManifestError("duplicate function_id '" + row.function_id + "'");
    if (row.features.size() != schema.width())
      throw ManifestError(at + " has " + std::to_string(row.features.size()) +
                          " features, schema width is " + std::to_string(schema.width()));
    if (row.label && !row.timing) throw ManifestError(at + " is labeled but has no timing");
    if (row.quarantine_reason && (row.label || row.timing))
      throw ManifestError(at + " is quarantined but carries a label or timing");
  }
}

namespace {

Json timing_to_json(const labeler::TimingRecord& t) {
  Json j = Json::object();
  j["t_basic"] = t.t_basic;
  j["t_aggr"] = t.t_aggr;
  j["ratio"] = t.ratio;
  j["samples_basic"] = t.samples_basic;
  j["samples_aggr"] = t.samples_aggr;
  return j;
}

std::vector<double> number_list(const Json& v, const std::string& what) {
  if (!v.is_array()) throw ManifestError(what + " must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ManifestError(what + " must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

double number(const Json& obj, const char* key, const std::string& what) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) throw ManifestError(what + "." + key + " must be a number");
  return it->get<double>();
}

labeler::TimingRecord timing_from_json(const Json& j, const std::string& what) {
  if (!j.is_object()) throw ManifestError(what + " must be an object");
  labeler::TimingRecord t;
  t.t_basic = number(j, "t_basic", what);
  t.t_aggr = number(j, "t_aggr", what);
  t.ratio = number(j, "ratio", what);
  t.samples_basic = number_list(j.value("samples_basic", Json::array()), what + ".samples_basic");
  t.samples_aggr = number_list(j.value("samples_aggr", Json::array()), what + ".samples_aggr");
  return t;
}

std::string string_field(const Json& obj, const char* key, const std::string& what) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) throw ManifestError(what + "." + key + " must be a string");
  return it->get<std::string>();
}

} // namespace

std::string manifest_to_text(const CorpusManifest& manifest) {
  manifest.validate();
  Json header = Json::object();
  header["record"] = "header";
  header["format_version"] = kManifestFormatVersion;
  header["max_depth"] = manifest.schema.max_depth();
  header["layout"] = manifest.schema.layout();
  header["config_hashes"] = manifest.config_hashes;
  header["metadata"] = manifest.metadata;
  std::string out = canonical_dump(header) + "\n";
  for (const auto& row : manifest.rows) {
    Json j = Json::object();
    j["record"] = "row";
    j["function_id"] = row.function_id;
    j["source_path"] = row.source_path;
    j["features"] = row.features;
    if (row.timing) j["timing"] = timing_to_json(*row.timing);
    if (row.label) j["label"] = std::string(to_string(*row.label));
    if (row.quarantine_reason) j["quarantine_reason"] = *row.quarantine_reason;
    out += canonical_dump(j) + "\n";
  }
  return out;
}

CorpusManifest manifest_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_header = false;
  CorpusManifest m;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string what = "manifest line " + std::to_string(line_no);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ManifestError(what + ": not valid JSON");
    }
    if (!j.is_object()) throw ManifestError(what + ": expected an object");
    const std::string record = string_field(j, "record", what);
    if (!have_header) {
      if (record != "header") throw ManifestError(what + ": the first record must be the header");
      auto version = j.find("format_version");
      if (version == j.end() || !version->is_number_integer() || version->get<int>() != kManifestFormatVersion)
        throw ManifestError(what + ": unsupported manifest format_version");
      auto depth = j.find("max_depth");
      if (depth == j.end() || !depth->is_number_integer() || depth->get<int>() < 1)
        throw ManifestError(what + ": max_depth must be a positive integer");
      m.schema = features::FeatureSchema(depth->get<int>());
      if (j.contains("layout") && j["layout"] != Json(m.schema.layout()))
        throw ManifestError(what + ": layout does not match max_depth");
      m.config_hashes = j.value("config_hashes", Json::object());
      m.metadata = j.value("metadata", Json::object());
      have_header = true;
      continue;
    }
    if (record != "row") throw ManifestError(what + ": unexpected record '" + record + "'");
    ManifestRow row;
    row.function_id = string_field(j, "function_id", what);
    row.source_path = j.contains("source_path") ? string_field(j, "source_path", what) : "";
    row.features = number_list(j.value("features", Json()), what + ".features");
    if (j.contains("timing")) row.timing = timing_from_json(j["timing"], what + ".timing");
    if (j.contains("label")) {
      const auto label = parse_label(string_field(j, "label", what));
      if (!label) throw ManifestError(what + ": label must be \"easy\" or \"hard\"");
      row.label = label;
    }
    if (j.contains("quarantine_reason")) row.quarantine_reason = string_field(j, "quarantine_reason", what);
    m.rows.push_back(std::move(row));
  }
  if (!have_header) throw ManifestError("manifest is empty");
  m.validate();
  return m;
}

void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path) {
  const std::string text = manifest_to_text(manifest);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing manifest " + path.string());
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read manifest " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return manifest_from_text(buf.str());
}

std::string manifest_fingerprint(const CorpusManifest& manifest) {
  return fingerprint(manifest_to_text(manifest));
}

} // namespace agile::cli
