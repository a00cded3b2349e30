#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tfmvc/data.hpp"
#include "tfmvc/metrics.hpp"
#include "tfmvc/training.hpp"

// The command implementations behind the CLI. Split out so tests can drive
// the exact surfaces the binary exposes.

namespace tfmvc::commands {

struct EvalSummary {
  std::size_t n_test = 0;
  double top1 = 0.0;
  double fleiss = std::numeric_limits<double>::quiet_NaN();
  double mvagt_score = 0.0;
  double auroc = std::numeric_limits<double>::quiet_NaN();
  long long conflicts = 0;
};

struct TrainOptions {
  std::string dataset_dir;
  std::string out_dir = "tfmvc-out";
  std::string config_file;  // optional key = value overrides
  training::TrainConfig cfg;
  bool pseudo_view = false;
  int normalize_mode = -1;  // -1 auto (off for synthetic), 0 off, 1 on
  double train_fraction = 0.8;
  bool kappa_exclude_pseudo = false;
  bool quiet = false;
};

struct EvalOptions {
  std::string checkpoint_path;
  std::string dataset_dir;
  std::string out_dir = "tfmvc-out/eval";
  double noise_level = 0.0;
  double noise_fraction = 1.0;
  std::optional<std::uint64_t> noise_seed;
  bool kappa_exclude_pseudo = false;
  bool quiet = false;
};

struct SynthOptions {
  std::string out_dir;
  data::SynthSpec spec = data::conflict_fixture_spec();
};

struct SweepOptions {
  std::string dataset_dir;
  std::string out_dir = "tfmvc-out/sweep";
  std::string parameter;  // smoothing | warmup | noise
  std::vector<double> values;
  int num_seeds = 3;
  training::TrainConfig cfg;
  bool pseudo_view = false;
  int normalize_mode = -1;
  double train_fraction = 0.8;
  double noise_fraction = 1.0;
  int jobs = 1;
};

// Applies `key = value` lines from a config file onto a TrainConfig.
void apply_config_file(const std::string& path, training::TrainConfig& cfg);

// Baked-in per-dataset learning rates; returns false for unknown names.
bool dataset_default_rates(const std::string& name, double& lr, double& rlr);

EvalSummary run_train(const TrainOptions& opts);
EvalSummary run_eval(const EvalOptions& opts);
int run_demo(std::ostream& os);
void run_synth(const SynthOptions& opts);
void run_sweep(const SweepOptions& opts);

// Prediction records over the test split via the testing-path predict().
std::vector<metrics::PredictionRecord> evaluate_records(const training::EvidentialNets& nets,
                                                        const data::MultiViewDataset& ds,
                                                        bool use_td);

}  // namespace tfmvc::commands
