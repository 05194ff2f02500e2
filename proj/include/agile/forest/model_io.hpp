#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "agile/forest/forest.hpp"

namespace agile::forest {

inline constexpr int kModelFormatVersion = 1;

/// Corrupt, truncated or structurally invalid model document.
class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ModelVersionError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};

class SchemaWidthError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};

// Model documents are JSON with fields in fixed order: format_version,
// schema, params, training_fingerprint, trees. Floats use the shortest
// round-trip decimal form, so equal models serialize to identical bytes.
std::string model_to_text(const RandomForest& model);
RandomForest model_from_text(const std::string& text);

void save_model(const RandomForest& model, const std::filesystem::path& path);
RandomForest load_model(const std::filesystem::path& path);

} // namespace agile::forest
