#include "agile/forest/metrics.hpp"

#include <map>
#include <stdexcept>

namespace agile::forest {

std::uint64_t Metrics::total() const {
  return confusion[0][0] + confusion[0][1] + confusion[1][0] + confusion[1][1];
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

Metrics finish(Metrics m) {
  m.accuracy = ratio(m.confusion[0][0] + m.confusion[1][1], m.total());
  for (int c = 0; c < 2; ++c) {
    const auto tp = m.confusion[c][c];
    m.precision[c] = ratio(tp, m.confusion[0][c] + m.confusion[1][c]);
    m.recall[c] = ratio(tp, m.confusion[c][0] + m.confusion[c][1]);
  }
  return m;
}

} // namespace

Metrics metrics_from(std::span<const Label> actual, std::span<const Label> predicted) {
  if (actual.empty()) throw std::invalid_argument("metrics: no rows");
  if (actual.size() != predicted.size()) throw std::invalid_argument("metrics: length mismatch");
  Metrics m;
  for (std::size_t i = 0; i < actual.size(); ++i)
    m.confusion[class_index(actual[i])][class_index(predicted[i])] += 1;
  return finish(m);
}

Metrics evaluate(const RandomForest& model, std::span<const LabeledRow> rows) {
  if (rows.empty()) throw std::invalid_argument("evaluate: no rows");
  std::vector<Label> actual;
  std::vector<Label> predicted;
  for (const auto& row : rows) {
    actual.push_back(row.label);
    predicted.push_back(predict_values(model, row.features).label);
  }
  return metrics_from(actual, predicted);
}

std::vector<int> assign_folds(std::span<const IdentifiedRow> rows, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("cross-validation needs k >= 2");
  // Group ids by the label of their first row, in order of first appearance.
  std::map<std::string, int> fold_of;
  std::array<std::vector<std::string>, 2> ids;
  for (const auto& r : rows) {
    if (fold_of.emplace(r.function_id, -1).second)
      ids[static_cast<std::size_t>(class_index(r.row.label))].push_back(r.function_id);
  }
  if (fold_of.size() < static_cast<std::size_t>(k))
    throw std::invalid_argument("cross-validation: " + std::to_string(fold_of.size()) +
                                " distinct functions cannot fill " + std::to_string(k) + " folds");
  Rng rng(seed);
  int next = 0;
  for (auto& group : ids) {
    for (std::size_t i = group.size(); i > 1; --i) std::swap(group[i - 1], group[uniform_below(rng, i)]);
    for (const auto& id : group) {
      fold_of[id] = next;
      next = (next + 1) % k;
    }
  }
  std::vector<int> folds;
  folds.reserve(rows.size());
  for (const auto& r : rows) folds.push_back(fold_of[r.function_id]);
  return folds;
}

CrossValidation cross_validate(std::span<const IdentifiedRow> rows,
                               const features::FeatureSchema& schema, const ForestParams& params,
                               int k, unsigned workers) {
  if (rows.empty()) throw std::invalid_argument("cross-validation: no rows");
  const auto folds = assign_folds(rows, k, params.rng_seed);
  CrossValidation cv;
  std::vector<Label> all_actual;
  std::vector<Label> all_predicted;
  double accuracy_sum = 0.0;
  for (int f = 0; f < k; ++f) {
    std::vector<LabeledRow> train;
    std::vector<LabeledRow> test;
    for (std::size_t i = 0; i < rows.size(); ++i) (folds[i] == f ? test : train).push_back(rows[i].row);
    const auto model = train_forest(train, schema, params, "", workers);
    std::vector<Label> actual;
    std::vector<Label> predicted;
    for (const auto& row : test) {
      actual.push_back(row.label);
      predicted.push_back(predict_values(model, row.features).label);
    }
    cv.folds.push_back(metrics_from(actual, predicted));
    accuracy_sum += cv.folds.back().accuracy;
    all_actual.insert(all_actual.end(), actual.begin(), actual.end());
    all_predicted.insert(all_predicted.end(), predicted.begin(), predicted.end());
  }
  cv.pooled = metrics_from(all_actual, all_predicted);
  cv.mean_accuracy = accuracy_sum / k;
  return cv;
}

} // namespace agile::forest
