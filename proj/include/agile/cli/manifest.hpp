#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "agile/common/json_io.hpp"
#include "agile/common/label.hpp"
#include "agile/features/features.hpp"
#include "agile/labeler/labeler.hpp"

namespace agile::cli {

inline constexpr int kManifestFormatVersion = 1;

struct ManifestRow {
  std::string function_id;
  std::string source_path;
  std::vector<double> features;
  std::optional<labeler::TimingRecord> timing;
  std::optional<Label> label;
  std::optional<std::string> quarantine_reason;

  bool labeled() const { return label.has_value(); }
};

/// Line-delimited JSON: one header record, then one record per row.
///   {"record":"header","format_version":1,"max_depth":D,"layout":[...],
///    "config_hashes":{...},"metadata":{...}}
///   {"record":"row","function_id":...,"source_path":...,"features":[...],
///    "timing":{...}?,"label":"easy"|"hard"?,"quarantine_reason":...?}
struct CorpusManifest {
  features::FeatureSchema schema{1};
  Json config_hashes = Json::object();  // e.g. "generator", "labeler"
  Json metadata = Json::object();       // settings that produced the file
  std::vector<ManifestRow> rows;

  /// Throws ManifestError when a row breaks the format's invariants.
  void validate() const;
};

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string manifest_to_text(const CorpusManifest& manifest);
CorpusManifest manifest_from_text(const std::string& text);
void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);
CorpusManifest load_manifest(const std::filesystem::path& path);

/// Digest of the canonical text; models record it as their training fingerprint.
std::string manifest_fingerprint(const CorpusManifest& manifest);

} // namespace agile::cli
