#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tfmvc/commands.hpp"

namespace {

std::string default_out_dir() {
  if (const char* env = std::getenv("TFMVC_OUT_DIR")) return env;
  return "tfmvc-out";
}

void add_train_config_flags(CLI::App* app, tfmvc::training::TrainConfig& cfg,
                            std::vector<int>& stage_epochs) {
  app->add_option("--seed", cfg.seed, "master seed for split/init/batching");
  app->add_option("--lr", cfg.lr, "functional learning rate");
  app->add_option("--rlr", cfg.rlr, "referral learning rate");
  app->add_option("--weight-decay", cfg.weight_decay, "decoupled weight decay");
  app->add_option("--warmup-epochs", cfg.warmup_epochs, "referral warm-up epochs");
  app->add_option("--stage-epochs", stage_epochs, "epochs for stages 2, 3, 4")
      ->expected(3);
  app->add_option("--smoothing", cfg.smoothing_eta, "warm-up label smoothing factor");
  app->add_option("--batch-size", cfg.batch_size, "minibatch size (0 = full batch)");
  app->add_option("--hidden", cfg.hidden_cap, "functional hidden width cap");
  app->add_option("--referral-encoder", cfg.referral_encoder, "referral encoder width");
  app->add_option("--referral-mix", cfg.referral_mix, "referral bilinear output width");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trust-discounted evidential multi-view classification"};
  app.require_subcommand(1);

  // ---- train ----
  auto* train = app.add_subcommand("train", "train on a dataset directory");
  tfmvc::commands::TrainOptions topt;
  topt.out_dir = default_out_dir();
  std::vector<int> stage_epochs;
  bool no_td = false;
  int normalize_flag = -1;
  train->add_option("--dataset", topt.dataset_dir, "dataset directory")->required();
  train->add_option("--out", topt.out_dir, "output directory");
  train->add_option("--config", topt.config_file, "key = value config file");
  train->add_flag("--pseudo-view", topt.pseudo_view, "append the concatenated pseudo view");
  train->add_flag("--no-td", no_td, "disable trust discounting (plain BCF)");
  train->add_option("--train-fraction", topt.train_fraction, "train split fraction");
  train->add_flag("--kappa-exclude-pseudo", topt.kappa_exclude_pseudo,
                  "drop the pseudo view from the kappa rater set");
  auto* norm = train->add_option("--normalize", normalize_flag,
                                 "1 = z-score with train stats, 0 = off (default: auto)");
  add_train_config_flags(train, topt.cfg, stage_epochs);

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  tfmvc::commands::EvalOptions eopt;
  eopt.out_dir = default_out_dir() + "/eval";
  std::uint64_t noise_seed = 0;
  eval->add_option("--checkpoint", eopt.checkpoint_path, "checkpoint file")->required();
  eval->add_option("--dataset", eopt.dataset_dir, "dataset directory")->required();
  eval->add_option("--out", eopt.out_dir, "output directory");
  eval->add_option("--noise-level", eopt.noise_level, "test-time noise level");
  eval->add_option("--noise-fraction", eopt.noise_fraction, "fraction of noised test instances");
  auto* ns = eval->add_option("--noise-seed", noise_seed, "noise stream seed");
  eval->add_flag("--kappa-exclude-pseudo", eopt.kappa_exclude_pseudo,
                 "drop the pseudo view from the kappa rater set");

  // ---- demo ----
  auto* demo = app.add_subcommand("demo", "print the worked navigation example");

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a synthetic conflict dataset");
  tfmvc::commands::SynthOptions sopt;
  std::vector<std::size_t> view_dims;
  std::vector<double> separation, noise_scale;
  std::vector<std::size_t> misleading;
  std::vector<int> permutation;
  synth->add_option("--out", sopt.out_dir, "output dataset directory")->required();
  synth->add_option("--classes", sopt.spec.num_classes, "number of classes");
  synth->add_option("--views", sopt.spec.num_views, "number of views");
  synth->add_option("--instances", sopt.spec.num_instances, "number of instances");
  synth->add_option("--dims", view_dims, "per-view feature dimensions");
  synth->add_option("--separation", separation, "per-view class-mean separation");
  synth->add_option("--noise", noise_scale, "per-view noise scale");
  synth->add_option("--misleading-views", misleading, "views with permuted class means");
  synth->add_option("--permutation", permutation, "label permutation for misleading views");
  synth->add_option("--mislead-fraction", sopt.spec.mislead_fraction,
                    "fraction of a misleading view's rows drawn at the permuted mean");
  synth->add_option("--seed", sopt.spec.seed, "generator seed");

  // ---- sweep ----
  auto* sweep = app.add_subcommand("sweep", "grid over one hyperparameter");
  tfmvc::commands::SweepOptions wopt;
  wopt.out_dir = default_out_dir() + "/sweep";
  std::vector<int> sweep_stage_epochs;
  bool sweep_no_td = false;
  int sweep_normalize = -1;
  sweep->add_option("--dataset", wopt.dataset_dir, "dataset directory")->required();
  sweep->add_option("--out", wopt.out_dir, "output directory");
  sweep->add_option("--param", wopt.parameter, "smoothing | warmup | noise")->required();
  sweep->add_option("--values", wopt.values, "grid values")->required();
  sweep->add_option("--seeds", wopt.num_seeds, "seeds per grid point");
  sweep->add_option("--jobs", wopt.jobs, "parallel workers");
  sweep->add_flag("--pseudo-view", wopt.pseudo_view, "append the concatenated pseudo view");
  sweep->add_flag("--no-td", sweep_no_td, "disable trust discounting");
  sweep->add_option("--train-fraction", wopt.train_fraction, "train split fraction");
  sweep->add_option("--noise-fraction", wopt.noise_fraction, "noised fraction for noise sweeps");
  auto* snorm = sweep->add_option("--normalize", sweep_normalize, "1 = on, 0 = off, auto default");
  add_train_config_flags(sweep, wopt.cfg, sweep_stage_epochs);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      if (!topt.config_file.empty()) {
        tfmvc::commands::apply_config_file(topt.config_file, topt.cfg);
      }
      // dataset-specific learning-rate defaults unless given explicitly
      double lr = 0, rlr = 0;
      const auto ds = tfmvc::data::load_dataset(topt.dataset_dir);
      if (tfmvc::commands::dataset_default_rates(ds.name, lr, rlr)) {
        if (train->count("--lr") == 0 && topt.config_file.empty()) topt.cfg.lr = lr;
        if (train->count("--rlr") == 0 && topt.config_file.empty()) topt.cfg.rlr = rlr;
      }
      if (stage_epochs.size() == 3) {
        topt.cfg.stage_epochs = {stage_epochs[0], stage_epochs[1], stage_epochs[2]};
      }
      if (no_td) topt.cfg.use_td = false;
      if (norm->count() > 0) topt.normalize_mode = normalize_flag;
      tfmvc::commands::run_train(topt);
    } else if (*eval) {
      if (ns->count() > 0) eopt.noise_seed = noise_seed;
      tfmvc::commands::run_eval(eopt);
    } else if (*demo) {
      return tfmvc::commands::run_demo(std::cout);
    } else if (*synth) {
      if (!view_dims.empty()) sopt.spec.view_dims = view_dims;
      if (synth->count("--classes") || synth->count("--views") || synth->count("--dims")) {
        // leaving the pinned fixture: clear its per-view trims unless given
        if (separation.empty()) sopt.spec.separation.clear();
        if (noise_scale.empty()) sopt.spec.noise_scale.clear();
        if (!synth->count("--misleading-views")) sopt.spec.misleading_views.clear();
      }
      if (!separation.empty()) sopt.spec.separation = separation;
      if (!noise_scale.empty()) sopt.spec.noise_scale = noise_scale;
      if (synth->count("--misleading-views")) sopt.spec.misleading_views = misleading;
      if (!permutation.empty()) sopt.spec.permutation = permutation;
      tfmvc::commands::run_synth(sopt);
    } else if (*sweep) {
      if (sweep_stage_epochs.size() == 3) {
        wopt.cfg.stage_epochs = {sweep_stage_epochs[0], sweep_stage_epochs[1],
                                 sweep_stage_epochs[2]};
      }
      if (sweep_no_td) wopt.cfg.use_td = false;
      if (snorm->count() > 0) wopt.normalize_mode = sweep_normalize;
      tfmvc::commands::run_sweep(wopt);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
