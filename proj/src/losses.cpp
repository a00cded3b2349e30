#include "tfmvc/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tfmvc::losses {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_positive(const std::vector<double>& alpha, const char* what) {
  if (alpha.empty()) throw std::invalid_argument(std::string(what) + ": empty vector");
  for (double a : alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw std::invalid_argument(std::string(what) + ": components must be positive");
    }
  }
}

}  // namespace

// Recurrence below 6, then the Bernoulli asymptotic series. Coefficients are
// B_2n / (2n); the tail after x^-16 is < 1e-13 at x = 6.
double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: x must be positive");
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // 1/12, -1/120, 1/252, -1/240, 1/132, -691/32760, 1/12, -3617/8160
  double series = 0.0;
  series = -3617.0 / 8160.0;
  series = series * inv2 + 1.0 / 12.0;
  series = series * inv2 - 691.0 / 32760.0;
  series = series * inv2 + 1.0 / 132.0;
  series = series * inv2 - 1.0 / 240.0;
  series = series * inv2 + 1.0 / 252.0;
  series = series * inv2 - 1.0 / 120.0;
  series = series * inv2 + 1.0 / 12.0;
  return result + std::log(x) - 0.5 * inv - series * inv2;
}

double trigamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("trigamma: x must be positive");
  double result = 0.0;
  while (x < 6.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // B_2n coefficients of x^-(2n+1): 1/6, -1/30, 1/42, -1/30, 5/66, -691/2730, 7/6
  double series = 7.0 / 6.0;
  series = series * inv2 - 691.0 / 2730.0;
  series = series * inv2 + 5.0 / 66.0;
  series = series * inv2 - 1.0 / 30.0;
  series = series * inv2 + 1.0 / 42.0;
  series = series * inv2 - 1.0 / 30.0;
  series = series * inv2 + 1.0 / 6.0;
  return result + inv + 0.5 * inv2 + series * inv2 * inv;
}

// Stirling series after shifting x above 8.
double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: x must be positive");
  double shift = 0.0;
  while (x < 8.0) {
    shift += std::log(x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // B_2n / (2n (2n-1)) x^-(2n-1)
  double series = 1.0 / 156.0;
  series = series * inv2 - 691.0 / 360360.0;
  series = series * inv2 + 1.0 / 1188.0;
  series = series * inv2 - 1.0 / 1680.0;
  series = series * inv2 + 1.0 / 1260.0;
  series = series * inv2 - 1.0 / 360.0;
  series = series * inv2 + 1.0 / 12.0;
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * kPi) + series * inv - shift;
}

LossValueWithGrad ace_loss(const std::vector<double>& alpha, std::size_t true_class) {
  check_positive(alpha, "ace_loss");
  if (true_class >= alpha.size()) throw std::invalid_argument("ace_loss: label out of range");
  double s = 0.0;
  for (double a : alpha) s += a;

  LossValueWithGrad out;
  out.value = digamma(s) - digamma(alpha[true_class]);
  out.grad_alpha.assign(alpha.size(), trigamma(s));
  out.grad_alpha[true_class] -= trigamma(alpha[true_class]);
  return out;
}

LossValueWithGrad ace_loss(const std::vector<double>& alpha, const std::vector<double>& y_one_hot) {
  if (y_one_hot.size() != alpha.size()) throw std::invalid_argument("ace_loss: label size mismatch");
  std::size_t hot = alpha.size();
  for (std::size_t k = 0; k < y_one_hot.size(); ++k) {
    if (y_one_hot[k] == 1.0 && hot == alpha.size()) {
      hot = k;
    } else if (y_one_hot[k] != 0.0) {
      throw std::invalid_argument("ace_loss: target is not one-hot");
    }
  }
  if (hot == alpha.size()) throw std::invalid_argument("ace_loss: target is not one-hot");
  return ace_loss(alpha, hot);
}

LossValueWithGrad kl_uniform(const std::vector<double>& alpha_tilde) {
  check_positive(alpha_tilde, "kl_uniform");
  const std::size_t k = alpha_tilde.size();
  double s = 0.0;
  for (double a : alpha_tilde) s += a;

  LossValueWithGrad out;
  out.value = log_gamma(s) - log_gamma(static_cast<double>(k));
  const double psi_s = digamma(s);
  for (double a : alpha_tilde) {
    out.value += -log_gamma(a) + (a - 1.0) * (digamma(a) - psi_s);
  }
  // d/d a_k = (a_k - 1) psi'(a_k) - (S - K) psi'(S)
  const double common = (s - static_cast<double>(k)) * trigamma(s);
  out.grad_alpha.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.grad_alpha[i] = (alpha_tilde[i] - 1.0) * trigamma(alpha_tilde[i]) - common;
  }
  return out;
}

std::vector<double> adjusted_alpha(const std::vector<double>& alpha, std::size_t true_class) {
  if (true_class >= alpha.size()) throw std::invalid_argument("adjusted_alpha: label out of range");
  std::vector<double> out = alpha;
  out[true_class] = 1.0;
  return out;
}

double annealing(int epoch) {
  if (epoch < 0) throw std::invalid_argument("annealing: epoch must be nonnegative");
  return std::min(1.0, static_cast<double>(epoch) / 10.0);
}

LossValueWithGrad overall_loss(const std::vector<double>& alpha, std::size_t true_class,
                               int epoch) {
  LossValueWithGrad out = ace_loss(alpha, true_class);
  const double lambda = annealing(epoch);
  if (lambda > 0.0) {
    const LossValueWithGrad kl = kl_uniform(adjusted_alpha(alpha, true_class));
    out.value += lambda * kl.value;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      if (i != true_class) out.grad_alpha[i] += lambda * kl.grad_alpha[i];
    }
  }
  return out;
}

int correctness_target(std::size_t pred_label, std::size_t true_label) {
  return pred_label == true_label ? 1 : 0;
}

SmoothedTarget smooth_label(int z, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("smooth_label: eta must lie in (0,1]");
  if (z != 0 && z != 1) throw std::invalid_argument("smooth_label: z must be 0 or 1");
  const double off = (1.0 - eta) / 2.0;
  SmoothedTarget t;
  t.probs = {off + (z == 1 ? eta : 0.0), off + (z == 0 ? eta : 0.0)};
  return t;
}

LossValueWithGrad warmup_loss(const std::vector<double>& beta_alpha, const SmoothedTarget& target) {
  check_positive(beta_alpha, "warmup_loss");
  if (beta_alpha.size() != 2 || target.probs.size() != 2) {
    throw std::invalid_argument("warmup_loss: expects Beta parameters and a binary target");
  }
  const double s = beta_alpha[0] + beta_alpha[1];
  const double psi_s = digamma(s);
  LossValueWithGrad out;
  out.grad_alpha.assign(2, 0.0);
  for (std::size_t j = 0; j < 2; ++j) {
    out.value += target.probs[j] * (psi_s - digamma(beta_alpha[j]));
  }
  const double tri_s = (target.probs[0] + target.probs[1]) * trigamma(s);
  for (std::size_t j = 0; j < 2; ++j) {
    out.grad_alpha[j] = tri_s - target.probs[j] * trigamma(beta_alpha[j]);
  }
  return out;
}

}  // namespace tfmvc::losses
