#include "tfmvc/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace tfmvc::metrics {

double top1(std::span<const PredictionRecord> records) {
  if (records.empty()) throw std::invalid_argument("top1: no records");
  std::size_t hits = 0;
  for (const auto& r : records) hits += r.fused_label == r.true_label ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double fleiss_kappa(const std::vector<std::vector<int>>& view_labels, std::size_t num_classes) {
  const std::size_t m = view_labels.size();
  if (m < 2) throw std::invalid_argument("fleiss_kappa: need at least 2 items");
  const std::size_t v = view_labels[0].size();
  if (v < 2) throw std::invalid_argument("fleiss_kappa: need at least 2 raters");

  std::vector<double> category_mass(num_classes, 0.0);
  double agreement = 0.0;
  std::vector<std::size_t> counts(num_classes);
  for (const auto& item : view_labels) {
    if (item.size() != v) throw std::invalid_argument("fleiss_kappa: ragged rater matrix");
    std::fill(counts.begin(), counts.end(), 0);
    for (int label : item) {
      if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
        throw std::invalid_argument("fleiss_kappa: label out of range");
      }
      ++counts[label];
    }
    double sum_sq = 0.0;
    for (std::size_t k = 0; k < num_classes; ++k) {
      sum_sq += static_cast<double>(counts[k]) * static_cast<double>(counts[k]);
      category_mass[k] += static_cast<double>(counts[k]);
    }
    agreement += (sum_sq - static_cast<double>(v)) /
                 (static_cast<double>(v) * static_cast<double>(v - 1));
  }
  const double p_bar = agreement / static_cast<double>(m);
  double p_e = 0.0;
  const double total = static_cast<double>(m) * static_cast<double>(v);
  for (double mass : category_mass) p_e += (mass / total) * (mass / total);

  if (p_bar >= 1.0) return 1.0;  // unanimous everywhere, even if p_e == 1
  if (1.0 - p_e <= 0.0) {
    throw std::domain_error("fleiss_kappa: expected agreement is 1 with imperfect agreement");
  }
  return (p_bar - p_e) / (1.0 - p_e);
}

double mvagt(std::span<const PredictionRecord> records, std::size_t num_views) {
  if (records.empty()) throw std::invalid_argument("mvagt: no records");
  std::size_t hits = 0;
  for (const auto& r : records) {
    std::size_t correct = 0;
    for (int label : r.view_labels) correct += label == r.true_label ? 1 : 0;
    // strict majority: 2 * correct > V
    if (2 * correct > num_views) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double auroc_uncertainty(std::span<const PredictionRecord> records) {
  std::vector<double> pos, neg;  // positive class: incorrect prediction
  for (const auto& r : records) {
    (r.fused_label != r.true_label ? pos : neg).push_back(r.fused_uncertainty);
  }
  if (pos.empty() || neg.empty()) {
    throw std::domain_error("auroc_uncertainty: needs both correct and incorrect records");
  }
  // Rank-sum with midranks for ties.
  std::vector<std::pair<double, int>> all;  // (score, is_positive)
  all.reserve(pos.size() + neg.size());
  for (double s : pos) all.emplace_back(s, 1);
  for (double s : neg) all.emplace_back(s, 0);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t t = i; t < j; ++t) {
      if (all[t].second) pos_rank_sum += midrank;
    }
    i = j;
  }
  const double np = static_cast<double>(pos.size());
  const double nn = static_cast<double>(neg.size());
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double conflict_ratio(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
  if (labels_a.size() != labels_b.size()) {
    throw std::invalid_argument("conflict_ratio: length mismatch");
  }
  if (labels_a.empty()) throw std::invalid_argument("conflict_ratio: empty vectors");
  std::size_t diff = 0;
  for (std::size_t i = 0; i < labels_a.size(); ++i) diff += labels_a[i] != labels_b[i] ? 1 : 0;
  return static_cast<double>(diff) / static_cast<double>(labels_a.size());
}

std::vector<std::vector<double>> conflict_matrix(const std::vector<std::vector<int>>& columns) {
  const std::size_t n = columns.size();
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      out[a][b] = out[b][a] = conflict_ratio(columns[a], columns[b]);
    }
  }
  return out;
}

}  // namespace tfmvc::metrics
