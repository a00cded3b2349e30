#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

// Subjective-logic opinion algebra: multinomial opinions with explicit
// uncertainty mass, their Dirichlet-evidence duals, belief constraint
// fusion and probability-sensitive trust discounting. All functions are
// pure and thread-safe.

namespace tfmvc::sl {

// Thrown by fusion when two dogmatic opinions are in total conflict
// (normalization mass 1 - C vanishes).
class ConflictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Nonnegative per-class evidence e; alpha = e + 1, strength S = sum(alpha).
struct DirichletEvidence {
  std::vector<double> evidence;

  DirichletEvidence() = default;
  explicit DirichletEvidence(std::vector<double> e);

  std::size_t num_classes() const { return evidence.size(); }
  double strength() const;               // S = sum(evidence) + K
  std::vector<double> alpha() const;     // e_k + 1
};

// omega = [b, u, a] with sum(b) + u = 1. Base rate defaults to uniform.
// Construction renormalizes additivity drift up to 1e-6 and rejects worse.
struct MultinomialOpinion {
  std::vector<double> belief;
  double uncertainty = 1.0;
  std::vector<double> base_rate;

  MultinomialOpinion() = default;
  MultinomialOpinion(std::vector<double> b, double u);
  MultinomialOpinion(std::vector<double> b, double u, std::vector<double> a);

  std::size_t num_classes() const { return belief.size(); }
  static MultinomialOpinion vacuous(std::size_t num_classes);
};

// Binomial (trust/distrust) opinion about the reliability of a view.
struct ReferralOpinion {
  double belief_trust = 0.0;
  double belief_distrust = 0.0;
  double uncertainty = 1.0;
  double base_rate_trust = 0.5;

  ReferralOpinion() = default;
  ReferralOpinion(double bt, double bd, double u, double at = 0.5);
};

// b_k = e_k / S, u = K / S, uniform base rate.
MultinomialOpinion evidence_to_opinion(const DirichletEvidence& ev);

// Inverse of evidence_to_opinion; requires uncertainty > 0.
DirichletEvidence opinion_to_evidence(const MultinomialOpinion& op);

// Belief constraint fusion of two opinions.
MultinomialOpinion bcf_pair(const MultinomialOpinion& a, const MultinomialOpinion& b);

// Left fold of bcf_pair over one or more opinions.
MultinomialOpinion bcf_fuse_all(std::span<const MultinomialOpinion> ops);

// Evidence-form BCF: e_k = e1_k + e2_k + e1_k * e2_k / K.
DirichletEvidence bcf_evidence(const DirichletEvidence& e1, const DirichletEvidence& e2);

// Projected probability of the trust outcome, p = b_t + a_t * u.
double degree_of_trust(const ReferralOpinion& r);

// Scales beliefs by p_t and returns the removed mass to uncertainty.
MultinomialOpinion trust_discount(const MultinomialOpinion& func, double p_t);

// Evidence-form discounting: scale evidence by p_t*u / (1 - p_t + p_t*u).
DirichletEvidence trust_discount_evidence(const DirichletEvidence& func_ev, double p_t);

// BCF fold over per-view discounted opinions.
MultinomialOpinion discounted_fuse(std::span<const MultinomialOpinion> funcs,
                                   std::span<const double> trusts);

// p_k = b_k + a_k * u.
std::vector<double> projected_probability(const MultinomialOpinion& op);

}  // namespace tfmvc::sl
