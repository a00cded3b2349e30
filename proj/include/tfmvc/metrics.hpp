#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Reliability metrics over per-instance prediction records.

namespace tfmvc::metrics {

struct PredictionRecord {
  int fused_label = 0;
  double fused_uncertainty = 0.0;
  int true_label = 0;
  std::vector<int> view_labels;
  std::vector<double> view_dot;
};

// Fraction of records whose fused label equals the ground truth.
double top1(std::span<const PredictionRecord> records);

// Fleiss' kappa over an M x V matrix of rater labels with K categories.
// Returns exactly 1.0 when every item has unanimous agreement.
double fleiss_kappa(const std::vector<std::vector<int>>& view_labels, std::size_t num_classes);

// Fraction of instances where a strict majority of views hits the truth.
double mvagt(std::span<const PredictionRecord> records, std::size_t num_views);

// Rank-based AUROC of uncertainty for flagging incorrect predictions;
// ties contribute 1/2.
double auroc_uncertainty(std::span<const PredictionRecord> records);

// Fraction of positions where two label vectors disagree.
double conflict_ratio(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

// Pairwise conflict-ratio matrix across label columns.
std::vector<std::vector<double>> conflict_matrix(const std::vector<std::vector<int>>& columns);

}  // namespace tfmvc::metrics
