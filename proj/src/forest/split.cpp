#include "agile/forest/split.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace agile::forest {

double gini(ClassCounts counts) {
  const auto n = counts[0] + counts[1];
  if (n == 0) throw std::invalid_argument("gini: empty node");
  const double pe = static_cast<double>(counts[0]) / static_cast<double>(n);
  const double ph = static_cast<double>(counts[1]) / static_cast<double>(n);
  return 1.0 - pe * pe - ph * ph;
}

namespace {

using Wide = unsigned __int128;

// Sum over children of (e^2 + h^2) / n_child, kept as an exact fraction.
// Minimizing weighted child Gini is the same as maximizing this purity score.
struct Purity {
  Wide num = 0;
  Wide den = 1;

  static Purity of_node(std::uint64_t e, std::uint64_t h) {
    return {Wide(e) * e + Wide(h) * h, Wide(e + h)};
  }
  static Purity of_split(std::uint64_t el, std::uint64_t hl, std::uint64_t er, std::uint64_t hr) {
    const Wide nl = el + hl;
    const Wide nr = er + hr;
    const Wide a = Wide(el) * el + Wide(hl) * hl;
    const Wide b = Wide(er) * er + Wide(hr) * hr;
    return {a * nr + b * nl, nl * nr};
  }
  bool greater_than(const Purity& o) const { return num * o.den > o.num * den; }
  long double value() const {
    return static_cast<long double>(num) / static_cast<long double>(den);
  }
};

struct Entry {
  double value;
  Label label;
};

} // namespace

std::optional<Split> best_split(std::span<const LabeledRow> rows, std::span<const std::size_t> sample,
                                std::span<const std::size_t> candidate_features,
                                std::size_t min_samples_leaf) {
  if (sample.empty()) throw std::invalid_argument("best_split: empty sample");
  if (candidate_features.empty()) throw std::invalid_argument("best_split: no candidate features");
  min_samples_leaf = std::max<std::size_t>(min_samples_leaf, 1);

  std::uint64_t easy = 0;
  for (auto r : sample) easy += rows[r].label == Label::Easy ? 1 : 0;
  const std::uint64_t n = sample.size();
  const std::uint64_t hard = n - easy;
  const Purity parent = Purity::of_node(easy, hard);

  std::vector<std::size_t> features(candidate_features.begin(), candidate_features.end());
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()), features.end());

  std::optional<Split> best;
  Purity best_score = parent;
  std::vector<Entry> entries(sample.size());
  for (std::size_t f : features) {
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const auto& row = rows[sample[i]];
      entries[i] = {row.features.at(f), row.label};
    }
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.value < b.value; });
    std::uint64_t left_easy = 0;
    std::uint64_t left_hard = 0;
    for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
      (entries[i].label == Label::Easy ? left_easy : left_hard) += 1;
      if (entries[i].value == entries[i + 1].value) continue;
      const std::uint64_t n_left = i + 1;
      if (n_left < min_samples_leaf || n - n_left < min_samples_leaf) continue;
      const Purity score =
          Purity::of_split(left_easy, left_hard, easy - left_easy, hard - left_hard);
      if (!score.greater_than(best_score)) continue;
      double threshold = std::midpoint(entries[i].value, entries[i + 1].value);
      if (threshold >= entries[i + 1].value) threshold = entries[i].value;
      best_score = score;
      const long double decrease = (score.value() - parent.value()) / static_cast<long double>(n);
      best = Split{f, threshold, static_cast<double>(decrease)};
    }
  }
  return best;
}

} // namespace agile::forest
