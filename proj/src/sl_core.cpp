#include "tfmvc/sl_core.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace tfmvc::sl {

namespace {

constexpr double kAdditivityRenormTol = 1e-6;
constexpr double kConflictFloor = 1e-12;

void check_finite_nonnegative(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0) {
      throw std::invalid_argument(std::string(what) + " must be finite and nonnegative");
    }
  }
}

std::vector<double> uniform_base_rate(std::size_t k) {
  return std::vector<double>(k, 1.0 / static_cast<double>(k));
}

}  // namespace

DirichletEvidence::DirichletEvidence(std::vector<double> e) : evidence(std::move(e)) {
  if (evidence.empty()) throw std::invalid_argument("evidence must be non-empty");
  check_finite_nonnegative(evidence, "evidence");
}

double DirichletEvidence::strength() const {
  double s = static_cast<double>(evidence.size());
  for (double e : evidence) s += e;
  return s;
}

std::vector<double> DirichletEvidence::alpha() const {
  std::vector<double> a(evidence.size());
  for (std::size_t k = 0; k < evidence.size(); ++k) a[k] = evidence[k] + 1.0;
  return a;
}

MultinomialOpinion::MultinomialOpinion(std::vector<double> b, double u)
    : MultinomialOpinion(std::move(b), u, {}) {}

MultinomialOpinion::MultinomialOpinion(std::vector<double> b, double u, std::vector<double> a)
    : belief(std::move(b)), uncertainty(u), base_rate(std::move(a)) {
  if (belief.empty()) throw std::invalid_argument("opinion needs at least one class");
  check_finite_nonnegative(belief, "belief");
  if (!std::isfinite(uncertainty) || uncertainty < 0.0) {
    throw std::invalid_argument("uncertainty must be finite and nonnegative");
  }
  double total = uncertainty;
  for (double x : belief) total += x;
  if (std::abs(total - 1.0) > kAdditivityRenormTol) {
    throw std::invalid_argument("opinion mass sums to " + std::to_string(total) +
                                ", expected 1 (additivity violated)");
  }
  for (double& x : belief) x /= total;
  uncertainty /= total;

  if (base_rate.empty()) {
    base_rate = uniform_base_rate(belief.size());
  } else {
    if (base_rate.size() != belief.size()) {
      throw std::invalid_argument("base rate size mismatch");
    }
    check_finite_nonnegative(base_rate, "base rate");
    double s = std::accumulate(base_rate.begin(), base_rate.end(), 0.0);
    if (std::abs(s - 1.0) > kAdditivityRenormTol) {
      throw std::invalid_argument("base rate must sum to 1");
    }
    for (double& x : base_rate) x /= s;
  }
}

MultinomialOpinion MultinomialOpinion::vacuous(std::size_t num_classes) {
  return MultinomialOpinion(std::vector<double>(num_classes, 0.0), 1.0);
}

ReferralOpinion::ReferralOpinion(double bt, double bd, double u, double at)
    : belief_trust(bt), belief_distrust(bd), uncertainty(u), base_rate_trust(at) {
  if (bt < 0.0 || bd < 0.0 || u < 0.0 || !std::isfinite(bt + bd + u)) {
    throw std::invalid_argument("referral masses must be finite and nonnegative");
  }
  double total = bt + bd + u;
  if (std::abs(total - 1.0) > kAdditivityRenormTol) {
    throw std::invalid_argument("referral masses must sum to 1");
  }
  belief_trust /= total;
  belief_distrust /= total;
  uncertainty /= total;
  if (at < 0.0 || at > 1.0) throw std::invalid_argument("base_rate_trust must lie in [0,1]");
}

MultinomialOpinion evidence_to_opinion(const DirichletEvidence& ev) {
  check_finite_nonnegative(ev.evidence, "evidence");
  const std::size_t k = ev.num_classes();
  const double s = ev.strength();
  std::vector<double> belief(k);
  for (std::size_t i = 0; i < k; ++i) belief[i] = ev.evidence[i] / s;
  return MultinomialOpinion(std::move(belief), static_cast<double>(k) / s);
}

DirichletEvidence opinion_to_evidence(const MultinomialOpinion& op) {
  if (op.uncertainty <= 0.0) {
    throw std::domain_error("dogmatic opinion (u = 0) has infinite evidence");
  }
  const double s = static_cast<double>(op.num_classes()) / op.uncertainty;
  std::vector<double> e(op.num_classes());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = op.belief[i] * s;
  return DirichletEvidence(std::move(e));
}

MultinomialOpinion bcf_pair(const MultinomialOpinion& a, const MultinomialOpinion& b) {
  const std::size_t k = a.num_classes();
  if (b.num_classes() != k) throw std::invalid_argument("bcf_pair: class count mismatch");

  // C = sum_{i != j} b1_i b2_j = (sum b1)(sum b2) - sum_k b1_k b2_k
  double sum_a = 0.0, sum_b = 0.0, dot = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sum_a += a.belief[i];
    sum_b += b.belief[i];
    dot += a.belief[i] * b.belief[i];
  }
  const double conflict = sum_a * sum_b - dot;
  const double norm = 1.0 - conflict;
  if (norm < kConflictFloor) {
    throw ConflictError("bcf_pair: total conflict between dogmatic opinions");
  }

  std::vector<double> belief(k);
  for (std::size_t i = 0; i < k; ++i) {
    belief[i] = (a.belief[i] * b.belief[i] + a.belief[i] * b.uncertainty +
                 b.belief[i] * a.uncertainty) /
                norm;
  }
  return MultinomialOpinion(std::move(belief), a.uncertainty * b.uncertainty / norm);
}

MultinomialOpinion bcf_fuse_all(std::span<const MultinomialOpinion> ops) {
  if (ops.empty()) throw std::invalid_argument("bcf_fuse_all: empty sequence");
  MultinomialOpinion acc = ops[0];
  for (std::size_t v = 1; v < ops.size(); ++v) acc = bcf_pair(acc, ops[v]);
  return acc;
}

DirichletEvidence bcf_evidence(const DirichletEvidence& e1, const DirichletEvidence& e2) {
  const std::size_t k = e1.num_classes();
  if (e2.num_classes() != k) throw std::invalid_argument("bcf_evidence: class count mismatch");
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    out[i] = e1.evidence[i] + e2.evidence[i] +
             e1.evidence[i] * e2.evidence[i] / static_cast<double>(k);
  }
  return DirichletEvidence(std::move(out));
}

double degree_of_trust(const ReferralOpinion& r) {
  return r.belief_trust + r.base_rate_trust * r.uncertainty;
}

MultinomialOpinion trust_discount(const MultinomialOpinion& func, double p_t) {
  if (!(p_t >= 0.0 && p_t <= 1.0)) {
    throw std::invalid_argument("trust_discount: p_t must lie in [0,1]");
  }
  std::vector<double> belief(func.num_classes());
  double belief_sum = 0.0;
  for (std::size_t i = 0; i < belief.size(); ++i) {
    belief[i] = p_t * func.belief[i];
    belief_sum += func.belief[i];
  }
  return MultinomialOpinion(std::move(belief), 1.0 - p_t * belief_sum, func.base_rate);
}

DirichletEvidence trust_discount_evidence(const DirichletEvidence& func_ev, double p_t) {
  if (!(p_t >= 0.0 && p_t <= 1.0)) {
    throw std::invalid_argument("trust_discount_evidence: p_t must lie in [0,1]");
  }
  const double u = static_cast<double>(func_ev.num_classes()) / func_ev.strength();
  const double factor = p_t * u / (1.0 - p_t + p_t * u);
  std::vector<double> out(func_ev.num_classes());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * func_ev.evidence[i];
  return DirichletEvidence(std::move(out));
}

MultinomialOpinion discounted_fuse(std::span<const MultinomialOpinion> funcs,
                                   std::span<const double> trusts) {
  if (funcs.size() != trusts.size()) {
    throw std::invalid_argument("discounted_fuse: views and trusts length mismatch");
  }
  if (funcs.empty()) throw std::invalid_argument("discounted_fuse: empty sequence");
  std::vector<MultinomialOpinion> discounted;
  discounted.reserve(funcs.size());
  for (std::size_t v = 0; v < funcs.size(); ++v) {
    discounted.push_back(trust_discount(funcs[v], trusts[v]));
  }
  return bcf_fuse_all(discounted);
}

std::vector<double> projected_probability(const MultinomialOpinion& op) {
  std::vector<double> p(op.num_classes());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = op.belief[i] + op.base_rate[i] * op.uncertainty;
  }
  return p;
}

}  // namespace tfmvc::sl
