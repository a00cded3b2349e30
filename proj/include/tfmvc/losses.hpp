#pragma once

#include <cstddef>
#include <vector>

// Evidential losses over Dirichlet/Beta concentration parameters, with
// analytic gradients, plus the digamma-family special functions they need.

namespace tfmvc::losses {

// Digamma psi(x) for x > 0; absolute error below 1e-12.
double digamma(double x);

// Trigamma psi'(x) for x > 0.
double trigamma(double x);

// ln Gamma(x) for x > 0.
double log_gamma(double x);

struct LossValueWithGrad {
  double value = 0.0;
  std::vector<double> grad_alpha;  // d loss / d alpha_k
};

// Smoothed binary target over (trust, distrust).
struct SmoothedTarget {
  std::vector<double> probs;  // size 2, sums to 1
};

// Bayes-risk cross-entropy under Dir(alpha): psi(S) - psi(alpha_true).
LossValueWithGrad ace_loss(const std::vector<double>& alpha, std::size_t true_class);
// One-hot overload; rejects vectors that are not exactly one-hot.
LossValueWithGrad ace_loss(const std::vector<double>& alpha, const std::vector<double>& y_one_hot);

// KL[ Dir(alpha_tilde) || Dir(1) ].
LossValueWithGrad kl_uniform(const std::vector<double>& alpha_tilde);

// alpha with the target coordinate forced to 1 (evidence removed).
std::vector<double> adjusted_alpha(const std::vector<double>& alpha, std::size_t true_class);

// KL annealing weight, min(1, epoch / 10).
double annealing(int epoch);

// ace + annealed KL on adjusted alpha. The KL gradient is cut at the
// target coordinate, where the substitution alpha_tilde_g = 1 is constant.
LossValueWithGrad overall_loss(const std::vector<double>& alpha, std::size_t true_class,
                               int epoch);

// 1 when the per-view prediction hits the ground truth, else 0.
int correctness_target(std::size_t pred_label, std::size_t true_label);

// one_hot(z) * eta + (1 - eta) / 2 over (trust, distrust); eta in (0, 1].
SmoothedTarget smooth_label(int z, double eta);

// Beta-evidence warm-up loss: sum_j z_j (psi(a1 + a2) - psi(a_j)); no KL term.
LossValueWithGrad warmup_loss(const std::vector<double>& beta_alpha, const SmoothedTarget& target);

}  // namespace tfmvc::losses
