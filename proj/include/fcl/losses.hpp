#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fcl/prob.hpp"

namespace fcl {

enum class LossFamily { cross_entropy, label_smoothing, brier, focal, flsd53, fcl };

std::string to_string(LossFamily family);
/// Accepts ce, ls, brier, focal, flsd53, fcl (and a few long spellings).
LossFamily parse_loss_family(std::string_view name);

/// Floor applied to probabilities inside log terms only.
inline constexpr double kLogFloor = 1e-12;

/// Tagged surrogate loss. Only the fields relevant to `family` are read.
struct LossSpec {
  LossFamily family = LossFamily::cross_entropy;
  double gamma = 0.0;   // focal, fcl
  double lambda = 0.0;  // fcl
  double alpha = 0.0;   // label_smoothing

  static LossSpec cross_entropy() { return {}; }
  static LossSpec label_smoothing(double alpha) { return {LossFamily::label_smoothing, 0.0, 0.0, alpha}; }
  static LossSpec brier() { return {LossFamily::brier, 0.0, 0.0, 0.0}; }
  static LossSpec focal(double gamma) { return {LossFamily::focal, gamma, 0.0, 0.0}; }
  static LossSpec flsd53() { return {LossFamily::flsd53, 0.0, 0.0, 0.0}; }
  static LossSpec fcl(double gamma, double lambda) { return {LossFamily::fcl, gamma, lambda, 0.0}; }

  /// Throws ValidationError on negative gamma/lambda or alpha outside [0, 1).
  void validate() const;

  friend bool operator==(const LossSpec&, const LossSpec&) = default;
};

std::string describe(const LossSpec& spec);

/// Focusing parameter used by FLSD-53 for a given true-class probability.
double flsd53_gamma(double true_class_prob);

/// Per-sample loss against a (one-hot or soft) target.
///
///   CE     -sum t_k log p_k
///   LS     CE against (1 - alpha) t + alpha / K
///   Brier  sum (p_k - t_k)^2
///   Focal  sum t_k (1 - p_k)^gamma (-log p_k)
///   FCL    Focal + lambda * Brier
///   FLSD53 Focal with gamma from flsd53_gamma(p at argmax t)
double eval_loss(const LossSpec& spec, const ProbVector& probs, const ProbVector& target);

struct LossEval {
  double value = 0.0;
  /// d loss / d logits, through the softmax.
  std::vector<double> grad_logits;
};

/// Loss of softmax(logits) and its exact logit gradient.
LossEval eval_loss_grad(const LossSpec& spec, std::span<const double> logits, const ProbVector& target);

struct EntropyBound {
  bool holds = false;
  double lhs = 0.0;  // focal loss
  double rhs = 0.0;  // KL(t || p) + H[t] - gamma H[p]
};

/// Checks focal(p, t) >= KL(t || p) + H[t] - gamma * H[p]; needs gamma >= 1.
EntropyBound entropy_bound_check(const ProbVector& probs, const ProbVector& target, double gamma);

/// A scalar function value with its first two derivatives.
struct ScalarDerivs {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// (1 - p)^gamma * (-log p) and its derivatives in p, for p in (0, 1].
ScalarDerivs focal_term(double gamma, double p);

/// Class-separable form of an expected loss.
///
/// For class weights w (counts or a distribution), sum_y w_y loss(p, e_y)
/// equals sum_k term(k, p_k) for every convex family in LossSpec, so
/// constrained minimizers can work one coordinate at a time. Terms use the
/// unclamped logarithm; callers keep p strictly positive.
class SeparableRisk {
 public:
  /// Throws ValidationError for FLSD53, whose risk is not convex.
  SeparableRisk(const LossSpec& spec, std::span<const double> weights);

  std::size_t size() const { return weights_.size(); }
  ScalarDerivs term(std::size_t k, double p) const;

 private:
  LossSpec spec_;
  std::vector<double> weights_;
  std::vector<double> log_weights_;  // weight on -log p_k
  double total_ = 0.0;
};

}  // namespace fcl
