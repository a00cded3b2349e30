#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

// Multi-view datasets: the on-disk directory format, train/test splitting,
// normalization, pseudo-view construction, synthetic conflict generation
// and test-time noise injection. Datasets are plain values; every seeded
// operation is a pure function of its inputs and the seed.

namespace tfmvc::data {

struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> values;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  const double* row(std::size_t r) const { return values.data() + r * cols; }
  std::vector<double> row_vec(std::size_t r) const {
    return std::vector<double>(row(r), row(r) + cols);
  }
};

struct MultiViewDataset {
  std::string name;
  std::size_t num_classes = 0;
  std::vector<Matrix> views;
  std::vector<int> labels;
  std::vector<std::size_t> train_idx, test_idx;  // empty until split() assigns them

  std::size_t num_views() const { return views.size(); }
  std::size_t num_instances() const { return labels.size(); }
  bool has_split() const { return !train_idx.empty() || !test_idx.empty(); }
  std::vector<std::size_t> view_dims() const;
};

// Directory format: `meta` (key = value), `view<i>.csv` per view, `labels`.
// Documented byte-exactly in docs/formats.md.
MultiViewDataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const MultiViewDataset& ds, const std::filesystem::path& dir);

// Seeded shuffle, then the first floor(N * fraction) indices train.
MultiViewDataset split(const MultiViewDataset& ds, double train_fraction, std::uint64_t seed);

// Appends one view holding the row-wise concatenation of all views, in
// view order (view 0 first).
MultiViewDataset make_pseudo_view(const MultiViewDataset& ds);

// Class means sit on scaled one-hot directions (seeded random directions
// when a view is narrower than the class count). A misleading view draws
// each row's mean from mu_perm(k) with probability mislead_fraction instead
// of mu_k, so its features genuinely belong to the wrong class's cluster
// for that subset rather than being relabeled wholesale (which a per-view
// classifier would simply learn).
struct SynthSpec {
  std::size_t num_classes = 5;
  std::size_t num_views = 3;
  std::size_t num_instances = 2000;
  std::vector<std::size_t> view_dims = {8, 8, 8};
  std::vector<double> separation = {};   // per view; empty = 3.0 everywhere
  std::vector<double> noise_scale = {};  // per view; empty = 1.0 everywhere
  std::vector<std::size_t> misleading_views = {};
  std::vector<int> permutation = {};     // empty = shift-by-one cycle
  double mislead_fraction = 0.5;
  std::uint64_t seed = 0;
};

MultiViewDataset synth_conflict(const SynthSpec& spec);

// The pinned fixture used by the trust-discounting ablation checks:
// 3 views, one misleading, K = 5, N = 2000.
SynthSpec conflict_fixture_spec();

// Adds zero-mean Gaussian noise (sd = level * per-feature train std) to one
// seeded view of a seeded fraction of test instances. Requires a split.
MultiViewDataset inject_noise(const MultiViewDataset& ds, double level, double fraction,
                              std::uint64_t seed);

// Per-view per-feature z-score with training-split statistics only.
MultiViewDataset normalize(const MultiViewDataset& ds);

// FNV-1a over the dataset directory's canonical files.
std::string dataset_fingerprint(const std::filesystem::path& dir);

// Named sub-stream derivation so split/init/batch/noise seeds are
// independently reproducible from one user seed.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view stream);

}  // namespace tfmvc::data
