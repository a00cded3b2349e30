#include "tfmvc/training.hpp"

#include <algorithm>
#include <stdexcept>

#include "tfmvc/losses.hpp"

namespace tfmvc::training {

namespace {

std::size_t argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

// Everything the fused backward pass needs from one instance's forward.
struct FusedForward {
  std::vector<nn::FunctionalTrace> func_traces;
  std::vector<nn::ReferralTrace> ref_traces;
  std::vector<std::vector<double>> func_ev;   // e, per view
  std::vector<double> strength;               // S = sum(e) + K
  std::vector<std::vector<double>> ref_ev;    // 2 referral evidences
  std::vector<double> dot;                    // p
  std::vector<double> factor;                 // t = p u / (1 - p + p u)
  std::vector<std::vector<double>> disc_ev;   // t * e
  std::vector<std::vector<double>> prefix;    // running BCF fold
  std::vector<double> fused_alpha;
};

void fused_forward(const EvidentialNets& nets, std::span<const std::vector<double>> views,
                   bool use_td, bool want_traces, FusedForward& f) {
  const std::size_t v_count = nets.functional.size();
  const std::size_t k = nets.num_classes;
  if (views.size() != v_count) {
    throw std::invalid_argument("fused_forward: expected " + std::to_string(v_count) + " views");
  }
  if (use_td && nets.referral.size() != v_count) {
    throw std::invalid_argument("fused_forward: trust discounting needs one referral net per view");
  }
  f.func_traces.resize(v_count);
  f.ref_traces.resize(v_count);
  f.func_ev.resize(v_count);
  f.strength.resize(v_count);
  f.ref_ev.assign(v_count, {});
  f.dot.assign(v_count, 1.0);
  f.factor.assign(v_count, 1.0);
  f.disc_ev.resize(v_count);
  f.prefix.resize(v_count);

  for (std::size_t v = 0; v < v_count; ++v) {
    f.func_ev[v] = nn::functional_forward(nets.functional[v], views[v],
                                          want_traces ? &f.func_traces[v] : nullptr);
    double s = static_cast<double>(k);
    for (double e : f.func_ev[v]) s += e;
    f.strength[v] = s;

    if (use_td) {
      std::vector<double> opinion(k + 1);
      for (std::size_t i = 0; i < k; ++i) opinion[i] = f.func_ev[v][i] / s;
      opinion[k] = static_cast<double>(k) / s;
      f.ref_ev[v] = nn::referral_forward(nets.referral[v], views[v], opinion,
                                         want_traces ? &f.ref_traces[v] : nullptr);
      const double sr = f.ref_ev[v][0] + f.ref_ev[v][1] + 2.0;
      const double p = (f.ref_ev[v][0] + 1.0) / sr;
      const double u = static_cast<double>(k) / s;
      f.dot[v] = p;
      f.factor[v] = p * u / (1.0 - p + p * u);
      f.disc_ev[v].resize(k);
      for (std::size_t i = 0; i < k; ++i) f.disc_ev[v][i] = f.factor[v] * f.func_ev[v][i];
    } else {
      f.disc_ev[v] = f.func_ev[v];
    }
    if (v == 0) {
      f.prefix[0] = f.disc_ev[0];
    } else {
      f.prefix[v].resize(k);
      for (std::size_t i = 0; i < k; ++i) {
        f.prefix[v][i] = f.prefix[v - 1][i] + f.disc_ev[v][i] +
                         f.prefix[v - 1][i] * f.disc_ev[v][i] / static_cast<double>(k);
      }
    }
  }
  f.fused_alpha.resize(k);
  for (std::size_t i = 0; i < k; ++i) f.fused_alpha[i] = f.prefix[v_count - 1][i] + 1.0;
}

void fused_backward(const EvidentialNets& nets, const FusedForward& f, bool use_td,
                    const std::vector<double>& dalpha,
                    std::vector<nn::FunctionalGrad>* fgrads,
                    std::vector<nn::ReferralGrad>* rgrads) {
  const std::size_t v_count = nets.functional.size();
  const std::size_t k = nets.num_classes;

  // Unfold the evidence-form BCF chain; the pair rule is elementwise.
  std::vector<std::vector<double>> ddisc(v_count, std::vector<double>(k));
  std::vector<double> g = dalpha;
  for (std::size_t v = v_count; v-- > 1;) {
    for (std::size_t i = 0; i < k; ++i) {
      ddisc[v][i] = g[i] * (1.0 + f.prefix[v - 1][i] / static_cast<double>(k));
      g[i] *= 1.0 + f.disc_ev[v][i] / static_cast<double>(k);
    }
  }
  ddisc[0] = g;

  for (std::size_t v = 0; v < v_count; ++v) {
    std::vector<double> dfunc_ev(k, 0.0);
    if (use_td) {
      const double s = f.strength[v];
      const double u = static_cast<double>(k) / s;
      const double p = f.dot[v];
      const double denom = 1.0 - p + p * u;
      double dfactor = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        dfactor += ddisc[v][i] * f.func_ev[v][i];
        dfunc_ev[i] = ddisc[v][i] * f.factor[v];
      }
      const double dp = dfactor * u / (denom * denom);
      double du = dfactor * p * (1.0 - p) / (denom * denom);

      const double sr = f.ref_ev[v][0] + f.ref_ev[v][1] + 2.0;
      std::vector<double> dref_ev = {dp * (f.ref_ev[v][1] + 1.0) / (sr * sr),
                                     -dp * (f.ref_ev[v][0] + 1.0) / (sr * sr)};
      std::vector<double> dopinion = nn::referral_backward(
          nets.referral[v], f.ref_traces[v], dref_ev, rgrads ? &(*rgrads)[v] : nullptr);

      if (fgrads) {
        du += dopinion[k];
        double dbelief_dot_ev = 0.0;
        for (std::size_t i = 0; i < k; ++i) dbelief_dot_ev += dopinion[i] * f.func_ev[v][i];
        for (std::size_t i = 0; i < k; ++i) {
          dfunc_ev[i] += dopinion[i] / s - dbelief_dot_ev / (s * s) -
                         du * static_cast<double>(k) / (s * s);
        }
      }
    } else {
      dfunc_ev = ddisc[v];
    }
    if (fgrads) {
      nn::functional_backward(nets.functional[v], f.func_traces[v], dfunc_ev, &(*fgrads)[v]);
    }
  }
}

std::vector<nn::TensorRef> all_functional_refs(EvidentialNets& nets) {
  std::vector<nn::TensorRef> refs;
  for (std::size_t v = 0; v < nets.functional.size(); ++v) {
    auto r = nn::param_refs(nets.functional[v], "functional." + std::to_string(v));
    refs.insert(refs.end(), r.begin(), r.end());
  }
  return refs;
}

std::vector<nn::TensorRef> all_referral_refs(EvidentialNets& nets) {
  std::vector<nn::TensorRef> refs;
  for (std::size_t v = 0; v < nets.referral.size(); ++v) {
    auto r = nn::param_refs(nets.referral[v], "referral." + std::to_string(v));
    refs.insert(refs.end(), r.begin(), r.end());
  }
  return refs;
}

std::vector<const std::vector<double>*> all_grad_refs(const std::vector<nn::FunctionalGrad>& gs) {
  std::vector<const std::vector<double>*> refs;
  for (const auto& g : gs) {
    auto r = nn::grad_refs(g);
    refs.insert(refs.end(), r.begin(), r.end());
  }
  return refs;
}

std::vector<const std::vector<double>*> all_grad_refs(const std::vector<nn::ReferralGrad>& gs) {
  std::vector<const std::vector<double>*> refs;
  for (const auto& g : gs) {
    auto r = nn::grad_refs(g);
    refs.insert(refs.end(), r.begin(), r.end());
  }
  return refs;
}

std::vector<std::vector<double>> gather_views(const data::MultiViewDataset& ds, std::size_t row) {
  std::vector<std::vector<double>> views;
  views.reserve(ds.num_views());
  for (const auto& m : ds.views) views.push_back(m.row_vec(row));
  return views;
}

std::vector<std::vector<std::size_t>> make_batches(const data::MultiViewDataset& ds,
                                                   const TrainConfig& cfg,
                                                   std::mt19937_64& rng) {
  std::vector<std::size_t> order = ds.train_idx;
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t bs = cfg.batch_size > 0 ? static_cast<std::size_t>(cfg.batch_size)
                                            : order.size();
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += bs) {
    const std::size_t end = std::min(order.size(), start + bs);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

// Training-split accuracies for epoch reports, using the same evidence
// path the gradients flow through.
void fill_report_accuracy(const EvidentialNets& nets, const data::MultiViewDataset& ds,
                          bool use_td, EpochReport& report) {
  const std::size_t v_count = nets.functional.size();
  std::vector<std::size_t> view_hits(v_count, 0);
  std::size_t fused_hits = 0;
  FusedForward f;
  for (std::size_t row : ds.train_idx) {
    auto views = gather_views(ds, row);
    fused_forward(nets, views, use_td, /*want_traces=*/false, f);
    for (std::size_t v = 0; v < v_count; ++v) {
      if (argmax_lowest(f.func_ev[v]) == static_cast<std::size_t>(ds.labels[row])) ++view_hits[v];
    }
    if (argmax_lowest(f.fused_alpha) == static_cast<std::size_t>(ds.labels[row])) ++fused_hits;
  }
  const double n = static_cast<double>(ds.train_idx.size());
  report.train_accuracy = static_cast<double>(fused_hits) / n;
  report.per_view_accuracy.resize(v_count);
  for (std::size_t v = 0; v < v_count; ++v) {
    report.per_view_accuracy[v] = static_cast<double>(view_hits[v]) / n;
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !(rlr > 0.0)) throw std::invalid_argument("learning rates must be positive");
  if (warmup_epochs < 0) throw std::invalid_argument("warmup_epochs must be nonnegative");
  for (int e : stage_epochs) {
    if (e < 0) throw std::invalid_argument("stage epochs must be nonnegative");
  }
  if (!(smoothing_eta > 0.0 && smoothing_eta <= 1.0)) {
    throw std::invalid_argument("smoothing eta must lie in (0,1]");
  }
  if (batch_size < 0) throw std::invalid_argument("batch size must be nonnegative");
}

EvidentialNets init_nets(const std::vector<std::size_t>& view_dims, std::size_t num_classes,
                         const TrainConfig& cfg) {
  EvidentialNets nets;
  nets.num_classes = num_classes;
  for (std::size_t v = 0; v < view_dims.size(); ++v) {
    const std::size_t hidden =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.hidden_cap), view_dims[v]);
    nets.functional.emplace_back(view_dims[v], std::max<std::size_t>(hidden, 1), num_classes);
    nn::init_params(nets.functional[v],
                    data::mix_seed(cfg.seed, "init.functional." + std::to_string(v)));
  }
  if (cfg.use_td) {
    for (std::size_t v = 0; v < view_dims.size(); ++v) {
      nets.referral.emplace_back(view_dims[v], num_classes,
                                 static_cast<std::size_t>(cfg.referral_encoder),
                                 static_cast<std::size_t>(cfg.referral_mix));
      nn::init_params(nets.referral[v],
                      data::mix_seed(cfg.seed, "init.referral." + std::to_string(v)));
    }
  }
  return nets;
}

TrainState make_train_state(const TrainConfig& cfg) {
  TrainState state;
  nn::AdamConfig adam;
  adam.weight_decay = cfg.weight_decay;
  state.functional_opt = nn::AdamState(adam);
  state.referral_opt = nn::AdamState(adam);
  state.batch_rng.seed(data::mix_seed(cfg.seed, "batch"));
  return state;
}

double per_view_loss_backward(const nn::FunctionalNet& net, const std::vector<double>& x,
                              int label, int epoch, double weight, nn::FunctionalGrad* grad) {
  nn::FunctionalTrace trace;
  std::vector<double> ev = nn::functional_forward(net, x, grad ? &trace : nullptr);
  std::vector<double> alpha(ev.size());
  for (std::size_t i = 0; i < ev.size(); ++i) alpha[i] = ev[i] + 1.0;
  losses::LossValueWithGrad loss =
      losses::overall_loss(alpha, static_cast<std::size_t>(label), epoch);
  if (grad) {
    for (double& d : loss.grad_alpha) d *= weight;
    nn::functional_backward(net, trace, loss.grad_alpha, grad);
  }
  return loss.value;
}

double fused_loss_backward(const EvidentialNets& nets,
                           std::span<const std::vector<double>> views, int label, int epoch,
                           bool use_td, double weight,
                           std::vector<nn::FunctionalGrad>* fgrads,
                           std::vector<nn::ReferralGrad>* rgrads) {
  FusedForward f;
  const bool want_grads = fgrads != nullptr || rgrads != nullptr;
  fused_forward(nets, views, use_td, want_grads, f);
  losses::LossValueWithGrad loss =
      losses::overall_loss(f.fused_alpha, static_cast<std::size_t>(label), epoch);
  if (want_grads) {
    for (double& d : loss.grad_alpha) d *= weight;
    fused_backward(nets, f, use_td, loss.grad_alpha, fgrads, rgrads);
  }
  return loss.value;
}

double fused_loss_value(const EvidentialNets& nets, std::span<const std::vector<double>> views,
                        int label, int epoch, bool use_td) {
  return fused_loss_backward(nets, views, label, epoch, use_td, 0.0, nullptr, nullptr);
}

double warmup_loss_backward(const EvidentialNets& nets, std::size_t view,
                            const std::vector<double>& x, int label, double eta, double weight,
                            nn::ReferralGrad* grad) {
  const std::size_t k = nets.num_classes;
  std::vector<double> ev = nn::functional_forward(nets.functional[view], x, nullptr);
  double s = static_cast<double>(k);
  for (double e : ev) s += e;
  std::vector<double> opinion(k + 1);
  for (std::size_t i = 0; i < k; ++i) opinion[i] = ev[i] / s;
  opinion[k] = static_cast<double>(k) / s;

  const int z = losses::correctness_target(argmax_lowest(ev), static_cast<std::size_t>(label));
  const losses::SmoothedTarget target = losses::smooth_label(z, eta);

  nn::ReferralTrace trace;
  std::vector<double> rev =
      nn::referral_forward(nets.referral[view], x, opinion, grad ? &trace : nullptr);
  std::vector<double> beta = {rev[0] + 1.0, rev[1] + 1.0};
  losses::LossValueWithGrad loss = losses::warmup_loss(beta, target);
  if (grad) {
    for (double& d : loss.grad_alpha) d *= weight;
    nn::referral_backward(nets.referral[view], trace, loss.grad_alpha, grad);
  }
  return loss.value;
}

std::vector<EpochReport> stage1_warmup(EvidentialNets& nets, const data::MultiViewDataset& ds,
                                       const TrainConfig& cfg, TrainState& state) {
  std::vector<EpochReport> reports;
  if (!cfg.use_td) return reports;
  auto refs = all_referral_refs(nets);
  std::vector<nn::ReferralGrad> grads(nets.referral.size());
  for (std::size_t v = 0; v < grads.size(); ++v) grads[v].init(nets.referral[v]);

  for (int epoch = 0; epoch < cfg.warmup_epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (const auto& batch : make_batches(ds, cfg, state.batch_rng)) {
      for (auto& g : grads) g.zero();
      const double w = 1.0 / static_cast<double>(batch.size());
      for (std::size_t row : batch) {
        auto views = gather_views(ds, row);
        for (std::size_t v = 0; v < nets.referral.size(); ++v) {
          loss_sum += warmup_loss_backward(nets, v, views[v], ds.labels[row],
                                           cfg.smoothing_eta, w, &grads[v]);
        }
        ++seen;
      }
      state.referral_opt.step(refs, all_grad_refs(grads), cfg.rlr);
    }
    EpochReport report;
    report.stage = "warmup";
    report.global_epoch = state.global_epoch;
    report.stage_epoch = epoch;
    report.kl_weight = losses::annealing(state.global_epoch);
    report.mean_loss = seen > 0 ? loss_sum / static_cast<double>(seen) : 0.0;
    report.conflict_skips = state.conflict_skips;
    fill_report_accuracy(nets, ds, cfg.use_td, report);
    reports.push_back(std::move(report));
    ++state.global_epoch;
  }
  return reports;
}

namespace {

std::vector<EpochReport> functional_stage(const char* tag, EvidentialNets& nets,
                                          const data::MultiViewDataset& ds,
                                          const TrainConfig& cfg, TrainState& state,
                                          int epochs) {
  std::vector<EpochReport> reports;
  auto refs = all_functional_refs(nets);
  std::vector<nn::FunctionalGrad> grads(nets.functional.size());
  for (std::size_t v = 0; v < grads.size(); ++v) grads[v].init(nets.functional[v]);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (const auto& batch : make_batches(ds, cfg, state.batch_rng)) {
      const double w = 1.0 / static_cast<double>(batch.size());
      // substage a: per-view evidential loss
      for (auto& g : grads) g.zero();
      for (std::size_t row : batch) {
        auto views = gather_views(ds, row);
        for (std::size_t v = 0; v < nets.functional.size(); ++v) {
          loss_sum += per_view_loss_backward(nets.functional[v], views[v], ds.labels[row],
                                             state.global_epoch, w, &grads[v]);
        }
        ++seen;
      }
      state.functional_opt.step(refs, all_grad_refs(grads), cfg.lr);
      // substage b: fused loss through trust discounting, a separate
      // gradient-descent update; disabled with the rest of the discounting
      // machinery in the no-discounting ablation
      if (!cfg.use_td) continue;
      for (auto& g : grads) g.zero();
      for (std::size_t row : batch) {
        auto views = gather_views(ds, row);
        try {
          loss_sum += fused_loss_backward(nets, views, ds.labels[row], state.global_epoch,
                                          cfg.use_td, w, &grads, nullptr);
        } catch (const sl::ConflictError&) {
          ++state.conflict_skips;
        }
      }
      state.functional_opt.step(refs, all_grad_refs(grads), cfg.lr);
    }
    EpochReport report;
    report.stage = tag;
    report.global_epoch = state.global_epoch;
    report.stage_epoch = epoch;
    report.kl_weight = losses::annealing(state.global_epoch);
    report.mean_loss = seen > 0 ? loss_sum / static_cast<double>(seen) : 0.0;
    report.conflict_skips = state.conflict_skips;
    fill_report_accuracy(nets, ds, cfg.use_td, report);
    reports.push_back(std::move(report));
    ++state.global_epoch;
  }
  return reports;
}

}  // namespace

std::vector<EpochReport> stage2_functional(EvidentialNets& nets, const data::MultiViewDataset& ds,
                                           const TrainConfig& cfg, TrainState& state) {
  return functional_stage("stage2", nets, ds, cfg, state, cfg.stage_epochs[0]);
}

std::vector<EpochReport> stage3_referral(EvidentialNets& nets, const data::MultiViewDataset& ds,
                                         const TrainConfig& cfg, TrainState& state) {
  std::vector<EpochReport> reports;
  if (!cfg.use_td) return reports;
  auto refs = all_referral_refs(nets);
  std::vector<nn::ReferralGrad> grads(nets.referral.size());
  for (std::size_t v = 0; v < grads.size(); ++v) grads[v].init(nets.referral[v]);

  for (int epoch = 0; epoch < cfg.stage_epochs[1]; ++epoch) {
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (const auto& batch : make_batches(ds, cfg, state.batch_rng)) {
      for (auto& g : grads) g.zero();
      const double w = 1.0 / static_cast<double>(batch.size());
      for (std::size_t row : batch) {
        auto views = gather_views(ds, row);
        try {
          loss_sum += fused_loss_backward(nets, views, ds.labels[row], state.global_epoch,
                                          cfg.use_td, w, nullptr, &grads);
        } catch (const sl::ConflictError&) {
          ++state.conflict_skips;
        }
        ++seen;
      }
      state.referral_opt.step(refs, all_grad_refs(grads), cfg.rlr);
    }
    EpochReport report;
    report.stage = "stage3";
    report.global_epoch = state.global_epoch;
    report.stage_epoch = epoch;
    report.kl_weight = losses::annealing(state.global_epoch);
    report.mean_loss = seen > 0 ? loss_sum / static_cast<double>(seen) : 0.0;
    report.conflict_skips = state.conflict_skips;
    fill_report_accuracy(nets, ds, cfg.use_td, report);
    reports.push_back(std::move(report));
    ++state.global_epoch;
  }
  return reports;
}

std::vector<EpochReport> stage4_functional(EvidentialNets& nets, const data::MultiViewDataset& ds,
                                           const TrainConfig& cfg, TrainState& state) {
  return functional_stage("stage4", nets, ds, cfg, state, cfg.stage_epochs[2]);
}

Prediction predict(const EvidentialNets& nets, std::span<const std::vector<double>> views,
                   bool use_td) {
  const std::size_t v_count = nets.functional.size();
  if (views.size() != v_count) throw std::invalid_argument("predict: view count mismatch");
  if (use_td && nets.referral.size() != v_count) {
    throw std::invalid_argument("predict: trust discounting needs one referral net per view");
  }
  const std::size_t k = nets.num_classes;

  Prediction pred;
  pred.per_view.reserve(v_count);
  pred.degree_of_trust.assign(v_count, 1.0);
  for (std::size_t v = 0; v < v_count; ++v) {
    std::vector<double> ev = nn::functional_forward(nets.functional[v], views[v], nullptr);
    pred.per_view.push_back(sl::evidence_to_opinion(sl::DirichletEvidence(ev)));
    if (use_td) {
      std::vector<double> opinion(k + 1);
      const auto& op = pred.per_view.back();
      for (std::size_t i = 0; i < k; ++i) opinion[i] = op.belief[i];
      opinion[k] = op.uncertainty;
      std::vector<double> rev = nn::referral_forward(nets.referral[v], views[v], opinion, nullptr);
      const double sr = rev[0] + rev[1] + 2.0;
      const sl::ReferralOpinion ref(rev[0] / sr, rev[1] / sr, 2.0 / sr);
      pred.degree_of_trust[v] = sl::degree_of_trust(ref);
    }
  }
  try {
    pred.fused = use_td ? sl::discounted_fuse(pred.per_view, pred.degree_of_trust)
                        : sl::bcf_fuse_all(pred.per_view);
    pred.label = argmax_lowest(pred.fused.belief);
  } catch (const sl::ConflictError&) {
    pred.conflict = true;
    pred.fused = sl::MultinomialOpinion::vacuous(k);
    pred.label = 0;
  }
  return pred;
}

TrainResult train(const data::MultiViewDataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  if (!ds.has_split()) throw std::invalid_argument("train: dataset has no split");
  if (ds.num_classes < 2) throw std::invalid_argument("train: need at least two classes");

  TrainResult result;
  result.nets = init_nets(ds.view_dims(), ds.num_classes, cfg);
  TrainState state = make_train_state(cfg);

  auto append = [&result](std::vector<EpochReport> reports) {
    for (auto& r : reports) result.reports.push_back(std::move(r));
  };
  append(stage1_warmup(result.nets, ds, cfg, state));
  append(stage2_functional(result.nets, ds, cfg, state));
  append(stage3_referral(result.nets, ds, cfg, state));
  append(stage4_functional(result.nets, ds, cfg, state));
  result.conflict_skips = state.conflict_skips;
  return result;
}

}  // namespace tfmvc::training
