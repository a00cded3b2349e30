#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tfmvc/data.hpp"
#include "tfmvc/neural.hpp"
#include "tfmvc/sl_core.hpp"

// Stage-wise training of the trust-fused evidential classifier:
//   1  warm up referral nets against correctness targets
//   2  update functional nets (per-view loss, then fused loss)
//   3  adjust referral nets with the fused loss
//   4  repeat stage 2
// plus the testing-time prediction path.

namespace tfmvc::training {

struct TrainConfig {
  double lr = 3e-3;             // functional nets
  double rlr = 1e-3;            // referral nets
  double weight_decay = 1e-4;
  int warmup_epochs = 1;
  std::array<int, 3> stage_epochs = {100, 50, 100};  // stages 2, 3, 4
  double smoothing_eta = 0.9;
  int batch_size = 200;
  std::uint64_t seed = 0;
  bool use_td = true;
  int hidden_cap = 64;     // functional hidden width = min(cap, input dim)
  int referral_encoder = 32;
  int referral_mix = 16;

  void validate() const;
};

struct EpochReport {
  std::string stage;
  int global_epoch = 0;
  int stage_epoch = 0;
  double mean_loss = 0.0;
  double kl_weight = 0.0;
  double train_accuracy = 0.0;
  std::vector<double> per_view_accuracy;
  long long conflict_skips = 0;
};

struct EvidentialNets {
  std::size_t num_classes = 0;
  std::vector<nn::FunctionalNet> functional;
  std::vector<nn::ReferralNet> referral;  // empty when trust discounting is off
};

// Optimizer state and the seeded streams shared across stages.
struct TrainState {
  nn::AdamState functional_opt;
  nn::AdamState referral_opt;
  std::mt19937_64 batch_rng;
  int global_epoch = 0;
  long long conflict_skips = 0;
};

EvidentialNets init_nets(const std::vector<std::size_t>& view_dims, std::size_t num_classes,
                         const TrainConfig& cfg);
TrainState make_train_state(const TrainConfig& cfg);

// One instance's per-view loss (stage 2a path): overall_loss on e + 1.
// Accumulates weight * gradients when grad is non-null; returns the loss.
double per_view_loss_backward(const nn::FunctionalNet& net, const std::vector<double>& x,
                              int label, int epoch, double weight, nn::FunctionalGrad* grad);

// One instance's fused loss through trust discounting and evidence-form
// BCF (stages 2b, 3, 4). Gradients flow to whichever of fgrads/rgrads is
// non-null; with trust discounting the functional gradient includes the
// path through the referral nets' opinion input.
double fused_loss_backward(const EvidentialNets& nets,
                           std::span<const std::vector<double>> views, int label, int epoch,
                           bool use_td, double weight,
                           std::vector<nn::FunctionalGrad>* fgrads,
                           std::vector<nn::ReferralGrad>* rgrads);

// Forward-only convenience used by gradient checks.
double fused_loss_value(const EvidentialNets& nets, std::span<const std::vector<double>> views,
                        int label, int epoch, bool use_td);

// One instance's warm-up loss for a single view's referral net.
double warmup_loss_backward(const EvidentialNets& nets, std::size_t view,
                            const std::vector<double>& x, int label, double eta, double weight,
                            nn::ReferralGrad* grad);

std::vector<EpochReport> stage1_warmup(EvidentialNets& nets, const data::MultiViewDataset& ds,
                                       const TrainConfig& cfg, TrainState& state);
std::vector<EpochReport> stage2_functional(EvidentialNets& nets, const data::MultiViewDataset& ds,
                                           const TrainConfig& cfg, TrainState& state);
std::vector<EpochReport> stage3_referral(EvidentialNets& nets, const data::MultiViewDataset& ds,
                                         const TrainConfig& cfg, TrainState& state);
std::vector<EpochReport> stage4_functional(EvidentialNets& nets, const data::MultiViewDataset& ds,
                                           const TrainConfig& cfg, TrainState& state);

struct Prediction {
  std::size_t label = 0;
  sl::MultinomialOpinion fused;
  std::vector<sl::MultinomialOpinion> per_view;
  std::vector<double> degree_of_trust;
  bool conflict = false;
};

// Testing path: per-view opinions, degrees of trust, opinion-form fusion,
// argmax over fused belief with ties broken toward the lowest index.
Prediction predict(const EvidentialNets& nets, std::span<const std::vector<double>> views,
                   bool use_td);

struct TrainResult {
  EvidentialNets nets;
  std::vector<EpochReport> reports;
  long long conflict_skips = 0;
};

TrainResult train(const data::MultiViewDataset& ds, const TrainConfig& cfg);

}  // namespace tfmvc::training
