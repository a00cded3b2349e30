#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>
#include <vector>

#include "tfmvc/losses.hpp"

using namespace tfmvc::losses;

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

// Reference values computed with 30-digit arithmetic.
struct Fixture {
  double x, value;
};

const Fixture kDigamma[] = {
    {0.1, -10.423754940411076232},
    {0.25, -4.2274535333762654081},
    {0.5, -1.9635100260214234794},
    {0.75, -1.0858608797864721696},
    {1.0, -0.57721566490153286061},
    {1.4615, -0.00012788075051636058391},
    {2.0, 0.42278433509846713939},
    {2.5, 0.70315664064524318723},
    {3.0, 0.92278433509846713939},
    {4.0, 1.2561176684318004727},
    {5.0, 1.5061176684318004727},
    {5.999, 1.7059363290792256036},
    {6.0, 1.7061176684318004727},
    {7.5, 1.9467574842460867881},
    {10.0, 2.2517525890667211076},
    {25.0, 3.1987425128519740085},
    {100.0, 4.6001618527380874002},
    {1000.0, 6.9072551956488120521},
    {1000000.0, 13.815510057964190771},
    {123.456, 4.8118293238289854123},
};

const Fixture kTrigamma[] = {
    {0.1, 101.4332991507927477},
    {0.5, 4.9348022005446793094},
    {1.0, 1.6449340668482264365},
    {1.5, 0.93480220054467930942},
    {2.0, 0.64493406684822643647},
    {3.0, 0.39493406684822643647},
    {4.5, 0.24872510303901037518},
    {6.0, 0.18132295573711532536},
    {8.0, 0.13313701469403142513},
    {12.0, 0.08690187287176839075},
    {50.0, 0.020201333226697125806},
    {200.0, 0.0050125208332291685267},
    {100000.0, 0.000010000050000166666667},
};

const Fixture kLogGamma[] = {
    {0.1, 2.252712651734205902},
    {0.5, 0.57236494292470008707},
    {0.9, 0.066376239734742954426},
    {1.0, 0.0},
    {1.5, -0.12078223763524522235},
    {2.0, 0.0},
    {3.7, 1.4280723266653881292},
    {6.0, 4.7874917427820459942},
    {8.0, 8.5251613610654143002},
    {10.0, 12.801827480081469611},
    {100.5, 361.43554046777762156},
    {1234.5, 7550.5509010778948957},
};

// Central finite differences over alpha.
template <typename Fn>
std::vector<double> fd_gradient(Fn&& fn, const std::vector<double>& alpha, double h = 1e-5) {
  std::vector<double> grad(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    std::vector<double> hi = alpha, lo = alpha;
    hi[i] += h;
    lo[i] -= h;
    grad[i] = (fn(hi) - fn(lo)) / (2.0 * h);
  }
  return grad;
}

void check_gradient(const std::vector<double>& analytic, const std::vector<double>& fd,
                    double rel_tol = 1e-4) {
  // Components near a zero crossing are compared against the gradient's
  // overall scale; h = 1e-5 central differences cannot resolve them
  // relative to themselves.
  double scale = 1e-8;
  for (double g : fd) scale = std::max(scale, 1e-2 * std::abs(g));
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(fd[i]), scale});
    CHECK(std::abs(analytic[i] - fd[i]) / denom < rel_tol);
  }
}

std::vector<double> random_alpha(std::mt19937_64& rng, std::size_t k, double lo = 1.0,
                                 double hi = 100.0) {
  std::uniform_real_distribution<double> unif(lo, hi);
  std::vector<double> a(k);
  for (double& x : a) x = unif(rng);
  return a;
}

}  // namespace

TEST_CASE("digamma fixtures and recurrence") {
  for (const auto& f : kDigamma) {
    CHECK(std::abs(digamma(f.x) - f.value) < 1e-12);
  }
  CHECK(std::abs(digamma(1.0) + kEulerGamma) < 1e-12);
  CHECK(std::abs(digamma(2.0) - digamma(1.0) - 1.0) < 1e-13);
  CHECK(std::abs(digamma(0.5) + kEulerGamma + 2.0 * std::log(2.0)) < 1e-12);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.01, 50.0);
  for (int i = 0; i < 200; ++i) {
    const double x = unif(rng);
    CHECK(std::abs(digamma(x + 1.0) - digamma(x) - 1.0 / x) < 1e-11);
  }
  CHECK_THROWS_AS(digamma(0.0), std::domain_error);
  CHECK_THROWS_AS(digamma(-3.0), std::domain_error);
}

TEST_CASE("trigamma fixtures, recurrence, and digamma cross-check") {
  for (const auto& f : kTrigamma) {
    CHECK(std::abs(trigamma(f.x) - f.value) < 1e-12 * (1.0 + std::abs(f.value)));
  }
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unif(0.1, 30.0);
  for (int i = 0; i < 100; ++i) {
    const double x = unif(rng);
    CHECK(std::abs(trigamma(x + 1.0) - trigamma(x) + 1.0 / (x * x)) < 1e-10);
    // derivative of digamma
    const double h = 1e-6;
    const double fd = (digamma(x + h) - digamma(x - h)) / (2.0 * h);
    CHECK(std::abs(trigamma(x) - fd) / std::max(1.0, std::abs(fd)) < 1e-7);
  }
  CHECK_THROWS_AS(trigamma(0.0), std::domain_error);
}

TEST_CASE("log_gamma fixtures and recurrence") {
  for (const auto& f : kLogGamma) {
    CHECK(std::abs(log_gamma(f.x) - f.value) < 1e-12 * (1.0 + std::abs(f.value)));
  }
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.1, 100.0);
  for (int i = 0; i < 200; ++i) {
    const double x = unif(rng);
    CHECK(std::abs(log_gamma(x + 1.0) - log_gamma(x) - std::log(x)) < 1e-11 * (1.0 + x));
    CHECK(std::abs(log_gamma(x) - std::lgamma(x)) < 1e-12 * (1.0 + std::abs(std::lgamma(x))));
  }
  CHECK_THROWS_AS(log_gamma(0.0), std::domain_error);
}

TEST_CASE("ace_loss worked values") {
  LossValueWithGrad l = ace_loss({1.0, 1.0}, std::size_t{0});
  CHECK(l.value == doctest::Approx(1.0).epsilon(1e-12));

  // psi(S) - psi(alpha_g) is close to log(S / alpha_g) for large arguments
  LossValueWithGrad big = ace_loss({1001.0, 1.0}, std::size_t{0});
  CHECK(big.value < 0.01);
  CHECK(big.value == doctest::Approx(std::log(1002.0 / 1001.0)).epsilon(1e-3));

  // depends on the non-target coordinates only through S
  LossValueWithGrad a = ace_loss({5.0, 2.0, 3.0}, std::size_t{0});
  LossValueWithGrad b = ace_loss({5.0, 3.0, 2.0}, std::size_t{0});
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-14));

  const std::vector<double> one_hot = {1.0, 0.0, 0.0};
  LossValueWithGrad c = ace_loss({5.0, 2.0, 3.0}, one_hot);
  CHECK(c.value == doctest::Approx(a.value).epsilon(1e-15));
  CHECK_THROWS_AS(ace_loss({5.0, 2.0}, std::vector<double>{0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(ace_loss({5.0, 2.0}, std::vector<double>{0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(ace_loss({-1.0, 2.0}, std::size_t{0}), std::invalid_argument);
}

TEST_CASE("ace_loss gradient matches finite differences and is negative at the target") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng() % 9;
    std::vector<double> alpha = random_alpha(rng, k);
    const std::size_t g = rng() % k;
    LossValueWithGrad l = ace_loss(alpha, g);
    check_gradient(l.grad_alpha,
                   fd_gradient([g](const std::vector<double>& a) { return ace_loss(a, g).value; },
                               alpha));
    CHECK(l.grad_alpha[g] < 0.0);
  }
}

TEST_CASE("kl_uniform worked values and positivity") {
  CHECK(kl_uniform({1.0, 1.0}).value == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(kl_uniform({1.0, 1.0, 1.0, 1.0, 1.0}).value == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(kl_uniform({2.0, 1.0}).value ==
        doctest::Approx(std::log(2.0) - 0.5).epsilon(1e-12));

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng() % 9;
    std::vector<double> alpha = random_alpha(rng, k, 0.2, 30.0);
    alpha[0] += 0.01;  // keep it away from the all-ones point
    CHECK(kl_uniform(alpha).value >= 0.0);
  }
  CHECK_THROWS_AS(kl_uniform({0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("kl_uniform gradient matches finite differences") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng() % 9;
    std::vector<double> alpha = random_alpha(rng, k, 0.5, 50.0);
    LossValueWithGrad l = kl_uniform(alpha);
    check_gradient(l.grad_alpha,
                   fd_gradient([](const std::vector<double>& a) { return kl_uniform(a).value; },
                               alpha));
  }
}

TEST_CASE("adjusted_alpha") {
  std::vector<double> a = adjusted_alpha({5.0, 3.0}, 0);
  CHECK(a[0] == 1.0);
  CHECK(a[1] == 3.0);

  std::vector<double> ones = adjusted_alpha({1.0, 1.0, 1.0}, 2);
  CHECK(ones == std::vector<double>{1.0, 1.0, 1.0});

  CHECK(kl_uniform(adjusted_alpha({7.0, 1.0}, 0)).value == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(kl_uniform(adjusted_alpha({7.0, 2.0}, 0)).value > 0.0);
}

TEST_CASE("annealing") {
  CHECK(annealing(0) == 0.0);
  CHECK(annealing(5) == 0.5);
  CHECK(annealing(10) == 1.0);
  CHECK(annealing(37) == 1.0);
  CHECK_THROWS_AS(annealing(-1), std::invalid_argument);
}

TEST_CASE("overall_loss composition") {
  std::vector<double> alpha = {4.0, 2.0, 7.0};
  CHECK(overall_loss(alpha, 1, 0).value == doctest::Approx(ace_loss(alpha, 1).value).epsilon(1e-14));

  // all-ones alpha: KL term vanishes, loss = psi(K) - psi(1)
  std::vector<double> ones = {1.0, 1.0, 1.0, 1.0};
  CHECK(overall_loss(ones, 2, 25).value ==
        doctest::Approx(digamma(4.0) - digamma(1.0)).epsilon(1e-13));

  // at epoch >= 10 the KL weight is exactly 1
  const double full = ace_loss(alpha, 1).value + kl_uniform(adjusted_alpha(alpha, 1)).value;
  CHECK(overall_loss(alpha, 1, 10).value == doctest::Approx(full).epsilon(1e-14));
  CHECK(overall_loss(alpha, 1, 99).value == doctest::Approx(full).epsilon(1e-14));
}

TEST_CASE("overall_loss gradient matches finite differences with the target cut") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng() % 9;
    std::vector<double> alpha = random_alpha(rng, k, 1.0, 100.0);
    const std::size_t g = rng() % k;
    const int epoch = static_cast<int>(rng() % 15);
    LossValueWithGrad l = overall_loss(alpha, g, epoch);
    // the adjusted-alpha substitution keeps the target coordinate out of
    // the KL term, so the composed loss is differentiable coordinatewise
    check_gradient(l.grad_alpha,
                   fd_gradient(
                       [g, epoch](const std::vector<double>& a) {
                         return overall_loss(a, g, epoch).value;
                       },
                       alpha));
  }
}

TEST_CASE("correctness_target") {
  CHECK(correctness_target(3, 3) == 1);
  CHECK(correctness_target(3, 5) == 0);
  CHECK(correctness_target(0, 0) == 1);
}

TEST_CASE("smooth_label") {
  SmoothedTarget t = smooth_label(1, 0.9);
  CHECK(t.probs[0] == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(t.probs[1] == doctest::Approx(0.05).epsilon(1e-15));

  SmoothedTarget hard = smooth_label(1, 1.0);
  CHECK(hard.probs[0] == 1.0);
  CHECK(hard.probs[1] == 0.0);

  SmoothedTarget t0 = smooth_label(0, 0.8);
  CHECK(t0.probs[0] == doctest::Approx(0.10).epsilon(1e-15));
  CHECK(t0.probs[1] == doctest::Approx(0.90).epsilon(1e-15));

  CHECK(t.probs[0] + t.probs[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(smooth_label(1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(smooth_label(1, 1.2), std::invalid_argument);
}

TEST_CASE("warmup_loss worked values and gradient") {
  LossValueWithGrad l = warmup_loss({1.0, 1.0}, smooth_label(1, 0.9));
  CHECK(l.value == doctest::Approx(1.0).epsilon(1e-12));

  // hard target reduces to the two-class ace loss
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unif(0.5, 20.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> beta = {unif(rng), unif(rng)};
    CHECK(warmup_loss(beta, smooth_label(1, 1.0)).value ==
          doctest::Approx(ace_loss(beta, std::size_t{0}).value).epsilon(1e-13));
  }

  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> beta = {unif(rng), unif(rng)};
    const int z = static_cast<int>(rng() % 2);
    SmoothedTarget target = smooth_label(z, 0.9);
    LossValueWithGrad w = warmup_loss(beta, target);
    check_gradient(w.grad_alpha,
                   fd_gradient(
                       [&target](const std::vector<double>& b) {
                         return warmup_loss(b, target).value;
                       },
                       beta));
  }
}
