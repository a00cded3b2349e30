// Acceptance suite: runs every advertised guarantee end to end and prints
// one pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "tfmvc/commands.hpp"
#include "tfmvc/data.hpp"
#include "tfmvc/losses.hpp"
#include "tfmvc/metrics.hpp"
#include "tfmvc/neural.hpp"
#include "tfmvc/sl_core.hpp"
#include "tfmvc/training.hpp"

using namespace tfmvc;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool report(int number, const char* what, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", number, what, detail.c_str());
  std::fflush(stdout);
  return ok;
}

sl::DirichletEvidence random_evidence(std::mt19937_64& rng, std::size_t k) {
  std::uniform_real_distribution<double> unif(0.0, 20.0);
  std::vector<double> e(k);
  for (double& x : e) x = unif(rng);
  return sl::DirichletEvidence(e);
}

std::size_t argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

// --- criterion 1: the worked example ---------------------------------

bool criterion1() {
  const auto start = Clock::now();
  std::ostringstream sink;
  const bool ok = commands::run_demo(sink) == 0;
  const double elapsed = seconds_since(start);
  char detail[128];
  std::snprintf(detail, sizeof(detail), "golden tables %s, %.3f s", ok ? "matched" : "mismatched",
                elapsed);
  return report(1, "worked-example demo", ok && elapsed < 1.0, detail);
}

// --- criterion 2: algebraic equivalences ------------------------------

bool criterion2() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst_a = 0.0, worst_b = 0.0, worst_c = 0.0, worst_d = 0.0;

  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + rng() % 9;

    // (a) evidence-form BCF vs opinion-form BCF
    sl::DirichletEvidence e1 = random_evidence(rng, k);
    sl::DirichletEvidence e2 = random_evidence(rng, k);
    sl::MultinomialOpinion via_ev = sl::evidence_to_opinion(sl::bcf_evidence(e1, e2));
    sl::MultinomialOpinion via_op =
        sl::bcf_pair(sl::evidence_to_opinion(e1), sl::evidence_to_opinion(e2));
    for (std::size_t i = 0; i < k; ++i) {
      worst_a = std::max(worst_a, std::abs(via_ev.belief[i] - via_op.belief[i]));
    }
    worst_a = std::max(worst_a, std::abs(via_ev.uncertainty - via_op.uncertainty));

    // (b) evidence-form vs opinion-form discounting
    const double p = unif(rng);
    sl::MultinomialOpinion d_ev = sl::evidence_to_opinion(sl::trust_discount_evidence(e1, p));
    sl::MultinomialOpinion d_op = sl::trust_discount(sl::evidence_to_opinion(e1), p);
    for (std::size_t i = 0; i < k; ++i) {
      worst_b = std::max(worst_b, std::abs(d_ev.belief[i] - d_op.belief[i]));
    }
    worst_b = std::max(worst_b, std::abs(d_ev.uncertainty - d_op.uncertainty));

    // (c) projected probability equals alpha / S
    sl::MultinomialOpinion op = sl::evidence_to_opinion(e2);
    std::vector<double> proj = sl::projected_probability(op);
    const double s = e2.strength();
    for (std::size_t i = 0; i < k; ++i) {
      worst_c = std::max(worst_c, std::abs(proj[i] - (e2.evidence[i] + 1.0) / s));
    }

    // (d) fold order invariance
    const std::size_t v = 2 + rng() % 4;
    std::vector<sl::MultinomialOpinion> ops;
    for (std::size_t i = 0; i < v; ++i) {
      ops.push_back(sl::evidence_to_opinion(random_evidence(rng, k)));
    }
    sl::MultinomialOpinion canonical = sl::bcf_fuse_all(ops);
    std::shuffle(ops.begin(), ops.end(), rng);
    sl::MultinomialOpinion shuffled = sl::bcf_fuse_all(ops);
    for (std::size_t i = 0; i < k; ++i) {
      worst_d = std::max(worst_d, std::abs(canonical.belief[i] - shuffled.belief[i]));
    }
    worst_d = std::max(worst_d, std::abs(canonical.uncertainty - shuffled.uncertainty));
  }
  const bool ok = worst_a < 1e-10 && worst_b < 1e-10 && worst_c < 1e-12 && worst_d < 1e-10;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "1000 cases each; max dev a=%.2e b=%.2e c=%.2e d=%.2e", worst_a, worst_b,
                worst_c, worst_d);
  return report(2, "algebraic equivalences", ok, detail);
}

// --- criterion 3: discounting never reduces fused uncertainty ---------

bool criterion3() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int violations = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t k = 2 + rng() % 9;
    const std::size_t v = 2 + rng() % 2;
    std::vector<sl::MultinomialOpinion> ops;
    std::vector<double> trusts;
    for (std::size_t i = 0; i < v; ++i) {
      ops.push_back(sl::evidence_to_opinion(random_evidence(rng, k)));
      double p = 1.0 - unif(rng);  // (0, 1]
      trusts.push_back(p);
    }
    const double disc = sl::discounted_fuse(ops, trusts).uncertainty;
    const double plain = sl::bcf_fuse_all(ops).uncertainty;
    if (disc < plain - 1e-12) ++violations;
    worst = std::min(worst, disc - plain);
  }
  char detail[128];
  std::snprintf(detail, sizeof(detail), "10000 trials, %d violations, min margin %.2e",
                violations, worst);
  return report(3, "discounted fusion keeps uncertainty up", violations == 0, detail);
}

// --- criterion 4: limiting trust recovers the correct label -----------

bool criterion4() {
  // Count-valued evidence (the worked examples are integer counts) keeps
  // the winning margin at least one evidence unit, which the near-limit
  // trusts 0.999/0.001 cannot erase.
  std::mt19937_64 rng(404);
  int trials = 0, hits = 0;
  while (trials < 10000) {
    const std::size_t k = 2 + rng() % 9;
    const std::size_t v = 2 + rng() % 4;
    std::vector<sl::DirichletEvidence> evs;
    std::vector<std::size_t> preds;
    for (std::size_t i = 0; i < v; ++i) {
      std::vector<double> e(k);
      for (double& x : e) x = static_cast<double>(rng() % 21);
      evs.emplace_back(e);
      preds.push_back(argmax(e));
    }
    const std::size_t g = preds[0];
    int ties = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (evs[0].evidence[i] == evs[0].evidence[g]) ++ties;
    }
    if (ties > 1) continue;  // require an unambiguous correct view
    ++trials;

    std::vector<sl::MultinomialOpinion> ops;
    std::vector<double> trusts;
    for (std::size_t i = 0; i < v; ++i) {
      ops.push_back(sl::evidence_to_opinion(evs[i]));
      trusts.push_back(preds[i] == g ? 0.999 : 0.001);
    }
    if (argmax(sl::discounted_fuse(ops, trusts).belief) == g) ++hits;
  }
  char detail[96];
  std::snprintf(detail, sizeof(detail), "%d / %d trials recovered the label", hits, trials);
  return report(4, "limiting trust assignment", hits == trials, detail);
}

// --- criterion 5: gradient correctness --------------------------------

struct GradCheck {
  int cases = 0;
  int kink_skips = 0;
  double worst = 0.0;

  // Components near a zero crossing are judged against the gradient's
  // overall scale. A parameter is skipped when it sits on a relu kink:
  // either the two-step central differences disagree (kink inside the
  // stencil) or the one-sided differences disagree (kink at the point,
  // where only a subgradient exists).
  void observe(double analytic, double fd_h, double fd_h2, double one_plus, double one_minus,
               double scale, double base_value) {
    ++cases;
    const double ref = std::max({std::abs(fd_h2), std::abs(analytic), 1e-6});
    if (std::abs(fd_h - fd_h2) > 1e-3 * ref ||
        std::abs(one_plus - one_minus) > 1e-2 * std::max(ref, scale)) {
      ++kink_skips;
      return;
    }
    // The quotient's own uncertainty: two-step disagreement plus the
    // round-off floor of differencing the loss at 1e-5 steps.
    const double fd_noise =
        4.0 * std::abs(fd_h - fd_h2) + 2e-11 * (1.0 + std::abs(base_value));
    if (std::abs(analytic - fd_h2) <= fd_noise) return;
    const double denom = std::max({std::abs(analytic), std::abs(fd_h2), scale, 1e-5});
    worst = std::max(worst, std::abs(analytic - fd_h2) / denom);
  }
};

bool criterion5() {
  const auto start = Clock::now();
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> alpha_dist(1.0, 100.0);
  std::uniform_real_distribution<double> input_dist(-1.2, 1.2);
  const double h = 1e-5;
  GradCheck standalone, composed;

  // standalone losses
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng() % 9;
    std::vector<double> alpha(k);
    for (double& a : alpha) a = alpha_dist(rng);
    const std::size_t g = rng() % k;
    const int epoch = static_cast<int>(rng() % 15);

    auto fd_vs = [&](auto&& fn, const std::vector<double>& grad, std::vector<double>& at) {
      double scale = 0.0;
      for (double gv : grad) scale = std::max(scale, 1e-2 * std::abs(gv));
      const double base = fn();
      for (std::size_t i = 0; i < at.size(); ++i) {
        const double keep = at[i];
        auto eval_at = [&](double step) {
          at[i] = keep + step;
          const double value = fn();
          at[i] = keep;
          return value;
        };
        const double hi = eval_at(h), lo = eval_at(-h);
        const double hi2 = eval_at(h / 2.0), lo2 = eval_at(-h / 2.0);
        standalone.observe(grad[i], (hi - lo) / (2.0 * h), (hi2 - lo2) / h,
                           (hi - base) / h, (base - lo) / h, scale, base);
      }
    };
    auto ace = losses::ace_loss(alpha, g);
    fd_vs([&] { return losses::ace_loss(alpha, g).value; }, ace.grad_alpha, alpha);
    auto kl = losses::kl_uniform(alpha);
    fd_vs([&] { return losses::kl_uniform(alpha).value; }, kl.grad_alpha, alpha);
    auto overall = losses::overall_loss(alpha, g, epoch);
    fd_vs([&] { return losses::overall_loss(alpha, g, epoch).value; }, overall.grad_alpha, alpha);

    std::vector<double> beta = {alpha_dist(rng), alpha_dist(rng)};
    const losses::SmoothedTarget target = losses::smooth_label(static_cast<int>(rng() % 2), 0.9);
    auto warm = losses::warmup_loss(beta, target);
    fd_vs([&] { return losses::warmup_loss(beta, target).value; }, warm.grad_alpha, beta);
  }

  // end-to-end through functional and referral micro networks
  for (int trial = 0; trial < 100; ++trial) {
    training::TrainConfig cfg;
    cfg.hidden_cap = 4;
    cfg.referral_encoder = 3;
    cfg.referral_mix = 2;
    cfg.seed = 1000 + static_cast<std::uint64_t>(trial);
    const std::size_t k = 2 + rng() % 3;
    training::EvidentialNets nets = training::init_nets({3, 3}, k, cfg);
    std::vector<std::vector<double>> x = {
        {input_dist(rng), input_dist(rng), input_dist(rng)},
        {input_dist(rng), input_dist(rng), input_dist(rng)}};
    const int label = static_cast<int>(rng() % k);
    const int epoch = static_cast<int>(rng() % 15);

    std::vector<nn::FunctionalGrad> fgrads(2);
    std::vector<nn::ReferralGrad> rgrads(2);
    for (std::size_t v = 0; v < 2; ++v) {
      fgrads[v].init(nets.functional[v]);
      rgrads[v].init(nets.referral[v]);
    }
    training::fused_loss_backward(nets, x, label, epoch, true, 1.0, &fgrads, &rgrads);
    auto loss_now = [&] { return training::fused_loss_value(nets, x, label, epoch, true); };

    double scale = 0.0;
    for (const auto& g : fgrads) {
      for (const auto* t : nn::grad_refs(g)) {
        for (double v : *t) scale = std::max(scale, 1e-2 * std::abs(v));
      }
    }
    for (const auto& g : rgrads) {
      for (const auto* t : nn::grad_refs(g)) {
        for (double v : *t) scale = std::max(scale, 1e-2 * std::abs(v));
      }
    }
    const double base = loss_now();
    auto check_net = [&](auto& net, const auto& grads, const char* prefix) {
      auto refs = nn::param_refs(net, prefix);
      auto grefs = nn::grad_refs(grads);
      for (std::size_t t = 0; t < refs.size(); ++t) {
        std::vector<double>& data = *refs[t].data;
        const std::vector<double>& analytic = *grefs[t];
        for (std::size_t i = 0; i < data.size(); ++i) {
          const double keep = data[i];
          auto eval_at = [&](double step) {
            data[i] = keep + step;
            const double value = loss_now();
            data[i] = keep;
            return value;
          };
          const double hi = eval_at(h), lo = eval_at(-h);
          const double hi2 = eval_at(h / 2.0), lo2 = eval_at(-h / 2.0);
          composed.observe(analytic[i], (hi - lo) / (2.0 * h), (hi2 - lo2) / h,
                           (hi - base) / h, (base - lo) / h, scale, base);
        }
      }
    };
    check_net(nets.functional[0], fgrads[0], "f0");
    check_net(nets.functional[1], fgrads[1], "f1");
    check_net(nets.referral[0], rgrads[0], "r0");
    check_net(nets.referral[1], rgrads[1], "r1");
  }
  const double elapsed = seconds_since(start);
  const int total_skips = standalone.kink_skips + composed.kink_skips;
  const int total_cases = standalone.cases + composed.cases;
  const bool ok = standalone.worst < 1e-4 && composed.worst < 1e-4 &&
                  total_skips * 20 < total_cases && elapsed < 30.0;
  char detail[192];
  std::snprintf(detail, sizeof(detail),
                "standalone max rel err %.2e (%d checks), end-to-end %.2e (%d checks), "
                "%d kink points skipped, %.1f s",
                standalone.worst, standalone.cases, composed.worst, composed.cases, total_skips,
                elapsed);
  return report(5, "gradients match finite differences", ok, detail);
}

// --- criterion 6: digamma fixtures ------------------------------------

bool criterion6() {
  const double gamma = 0.57721566490153286061;
  struct Fixture {
    double x, value;
  };
  const Fixture table[] = {
      {0.1, -10.423754940411076232},   {0.25, -4.2274535333762654081},
      {0.75, -1.0858608797864721696},  {1.4615, -0.00012788075051636058391},
      {2.5, 0.70315664064524318723},   {3.0, 0.92278433509846713939},
      {4.0, 1.2561176684318004727},    {5.0, 1.5061176684318004727},
      {5.999, 1.7059363290792256036},  {6.0, 1.7061176684318004727},
      {7.5, 1.9467574842460867881},    {10.0, 2.2517525890667211076},
      {25.0, 3.1987425128519740085},   {100.0, 4.6001618527380874002},
      {1000.0, 6.9072551956488120521}, {1000000.0, 13.815510057964190771},
      {123.456, 4.8118293238289854123},{12.0, 2.4426616799758120167},
      {0.33, -3.1659950482671994757},  {42.0, 3.7257176179372821503},
  };
  double worst = 0.0;
  worst = std::max(worst, std::abs(losses::digamma(1.0) + gamma));
  worst = std::max(worst, std::abs(losses::digamma(2.0) - (1.0 - gamma)));
  worst = std::max(worst, std::abs(losses::digamma(0.5) + gamma + 2.0 * std::log(2.0)));
  for (const auto& f : table) worst = std::max(worst, std::abs(losses::digamma(f.x) - f.value));
  char detail[96];
  std::snprintf(detail, sizeof(detail), "23 fixtures, max abs err %.2e", worst);
  return report(6, "digamma reference values", worst < 1e-12, detail);
}

// --- criterion 7: trust discounting beats plain fusion ----------------

bool criterion7() {
  const auto start = Clock::now();
  data::SynthSpec spec = data::conflict_fixture_spec();

  double td_top1 = 0.0, plain_top1 = 0.0, td_kappa = 0.0, plain_kappa = 0.0;
  const int num_seeds = 5;
  for (int seed = 0; seed < num_seeds; ++seed) {
    spec.seed = static_cast<std::uint64_t>(seed);
    data::MultiViewDataset ds =
        data::split(data::synth_conflict(spec), 0.8, data::mix_seed(seed, "split"));
    for (bool use_td : {true, false}) {
      training::TrainConfig cfg;
      cfg.seed = static_cast<std::uint64_t>(seed);
      cfg.use_td = use_td;
      cfg.stage_epochs = {30, 15, 10};  // the fixture's pinned budget
      cfg.batch_size = 200;
      training::TrainResult result = training::train(ds, cfg);
      std::vector<metrics::PredictionRecord> records =
          commands::evaluate_records(result.nets, ds, use_td);
      const double top1 = metrics::top1(records);
      std::vector<std::vector<int>> raters;
      for (const auto& r : records) raters.push_back(r.view_labels);
      const double kappa = metrics::fleiss_kappa(raters, ds.num_classes);
      (use_td ? td_top1 : plain_top1) += top1 / num_seeds;
      (use_td ? td_kappa : plain_kappa) += kappa / num_seeds;
    }
  }
  const double elapsed = seconds_since(start);
  const bool ok =
      td_top1 - plain_top1 >= 0.02 && td_kappa >= plain_kappa && elapsed < 300.0;
  char detail[192];
  std::snprintf(detail, sizeof(detail),
                "top1 %.4f vs %.4f (gap %+.4f), kappa %.4f vs %.4f, %.0f s / 5 seeds", td_top1,
                plain_top1, td_top1 - plain_top1, td_kappa, plain_kappa, elapsed);
  return report(7, "trust-discounting ablation direction", ok, detail);
}

// --- criterion 8: metric oracles ---------------------------------------

bool criterion8() {
  bool ok = true;
  std::string why = "fleiss/auroc/mvagt/cr oracles agree";

  // Fleiss: the 14-rater, 10-item, 5-category worked table
  const int counts[10][5] = {{0, 0, 0, 0, 14}, {0, 2, 6, 4, 2}, {0, 0, 3, 5, 6},
                             {0, 3, 9, 2, 0},  {2, 2, 8, 1, 1}, {7, 7, 0, 0, 0},
                             {3, 2, 6, 3, 0},  {2, 5, 3, 2, 2}, {6, 5, 2, 1, 0},
                             {0, 2, 2, 3, 7}};
  std::vector<std::vector<int>> items(10);
  for (int i = 0; i < 10; ++i) {
    for (int k = 0; k < 5; ++k) {
      for (int c = 0; c < counts[i][k]; ++c) items[i].push_back(k);
    }
  }
  const double kappa = metrics::fleiss_kappa(items, 5);
  // independent brute force over rater pairs
  double pbar = 0.0;
  std::vector<double> mass(5, 0.0);
  for (const auto& item : items) {
    double agree = 0.0;
    for (std::size_t a = 0; a < item.size(); ++a) {
      for (std::size_t b = 0; b < item.size(); ++b) {
        if (a != b && item[a] == item[b]) agree += 1.0;
      }
      mass[item[a]] += 1.0;
    }
    pbar += agree / (14.0 * 13.0);
  }
  pbar /= 10.0;
  double pe = 0.0;
  for (double m : mass) pe += (m / 140.0) * (m / 140.0);
  const double brute = (pbar - pe) / (1.0 - pe);
  if (std::abs(kappa - brute) > 1e-12) ok = false;
  if (std::abs(kappa - 0.21) > 0.005) ok = false;

  std::vector<std::vector<int>> perfect = {{1, 1, 1}, {0, 0, 0}};
  if (metrics::fleiss_kappa(perfect, 2) != 1.0) ok = false;
  std::vector<std::vector<int>> disagree = {{0, 1}, {0, 1}, {1, 0}, {1, 0}};
  if (std::abs(metrics::fleiss_kappa(disagree, 2) + 1.0) > 1e-12) ok = false;

  // AUROC vs pairwise brute force
  std::mt19937_64 rng(808);
  double worst_auroc = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<metrics::PredictionRecord> records;
    bool pos = false, neg = false;
    for (int i = 0; i < 20; ++i) {
      metrics::PredictionRecord r;
      r.true_label = 0;
      r.fused_label = static_cast<int>(rng() % 2);
      r.fused_uncertainty = static_cast<double>(rng() % 6) / 6.0;
      (r.fused_label != 0 ? pos : neg) = true;
      records.push_back(r);
    }
    if (!pos || !neg) continue;
    double pairs = 0.0, wins = 0.0;
    for (const auto& p : records) {
      if (p.fused_label == p.true_label) continue;
      for (const auto& n : records) {
        if (n.fused_label != n.true_label) continue;
        pairs += 1.0;
        if (p.fused_uncertainty > n.fused_uncertainty) wins += 1.0;
        else if (p.fused_uncertainty == n.fused_uncertainty) wins += 0.5;
      }
    }
    worst_auroc =
        std::max(worst_auroc, std::abs(metrics::auroc_uncertainty(records) - wins / pairs));
  }
  if (worst_auroc > 1e-12) ok = false;

  // MVAGT and conflict ratio against hand counts
  std::vector<metrics::PredictionRecord> mv(4);
  mv[0].true_label = 1; mv[0].view_labels = {1, 1, 0};  // majority
  mv[1].true_label = 1; mv[1].view_labels = {1, 0, 0};  // minority
  mv[2].true_label = 2; mv[2].view_labels = {2, 2, 2};  // unanimous
  mv[3].true_label = 0; mv[3].view_labels = {1, 2, 0};  // single vote
  for (auto& r : mv) r.fused_label = r.true_label;
  if (metrics::mvagt(mv, 3) != 0.5) ok = false;
  if (metrics::conflict_ratio({0, 1, 2, 0}, {0, 2, 2, 1}) != 0.5) ok = false;
  if (metrics::conflict_ratio({3, 3}, {3, 3}) != 0.0) ok = false;
  if (metrics::conflict_ratio({0, 1}, {1, 0}) != 1.0) ok = false;

  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "fleiss %.6f (oracle %.6f), auroc max dev %.1e, fixtures exact", kappa, brute,
                worst_auroc);
  return report(8, "metric oracles", ok, detail);
}

// --- criterion 9: bitwise reproducibility ------------------------------

bool criterion9() {
  const fs::path base = fs::temp_directory_path() / "tfmvc_accept_det";
  fs::remove_all(base);
  fs::create_directories(base);
  const fs::path ds_dir = base / "data";

  commands::SynthOptions sopt;
  sopt.out_dir = ds_dir.string();
  sopt.spec.num_instances = 300;
  sopt.spec.seed = 11;
  commands::run_synth(sopt);

  auto run = [&](const char* name) {
    commands::TrainOptions topt;
    topt.dataset_dir = ds_dir.string();
    topt.out_dir = (base / name).string();
    topt.cfg.seed = 9;
    topt.cfg.stage_epochs = {4, 2, 3};
    topt.cfg.batch_size = 100;
    topt.quiet = true;
    commands::run_train(topt);
    return base / name;
  };
  const fs::path a = run("run_a");
  const fs::path b = run("run_b");

  auto same = [](const fs::path& x, const fs::path& y) {
    std::ifstream fx(x, std::ios::binary), fy(y, std::ios::binary);
    std::ostringstream sx, sy;
    sx << fx.rdbuf();
    sy << fy.rdbuf();
    return fx.good() && fy.good() && sx.str() == sy.str();
  };
  bool ok = true;
  for (const char* f : {"checkpoint.txt", "metrics.txt", "metrics.csv", "epochs.csv",
                        "instances.csv"}) {
    ok = ok && same(a / f, b / f);
  }
  fs::remove_all(base);
  return report(9, "bitwise deterministic training", ok,
                ok ? "identical checkpoints and metrics" : "artifacts differ");
}

}  // namespace

int main() {
  bool all = true;
  all &= criterion1();
  all &= criterion2();
  all &= criterion3();
  all &= criterion4();
  all &= criterion5();
  all &= criterion6();
  all &= criterion7();
  all &= criterion8();
  all &= criterion9();
  std::printf("%s\n", all ? "ACCEPTANCE: all criteria passed" : "ACCEPTANCE: FAILURES PRESENT");
  return all ? 0 : 1;
}
