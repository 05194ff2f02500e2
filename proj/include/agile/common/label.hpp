#pragma once

#include <optional>
#include <string_view>

namespace agile {

// Ties anywhere in the pipeline resolve to Hard: extra optimization of an
// easy function only costs compile time.
enum class Label { Easy, Hard };

constexpr std::string_view to_string(Label label) {
  return label == Label::Easy ? "easy" : "hard";
}

constexpr std::optional<Label> parse_label(std::string_view text) {
  if (text == "easy") return Label::Easy;
  if (text == "hard") return Label::Hard;
  return std::nullopt;
}

/// Index used by vote tallies and confusion matrices: easy = 0, hard = 1.
constexpr int class_index(Label label) { return label == Label::Easy ? 0 : 1; }

} // namespace agile
