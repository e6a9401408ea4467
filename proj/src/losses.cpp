#include "fcl/losses.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "fcl/error.hpp"

namespace fcl {

std::string to_string(LossFamily family) {
  switch (family) {
    case LossFamily::cross_entropy: return "ce";
    case LossFamily::label_smoothing: return "ls";
    case LossFamily::brier: return "brier";
    case LossFamily::focal: return "focal";
    case LossFamily::flsd53: return "flsd53";
    case LossFamily::fcl: return "fcl";
  }
  return "unknown";
}

LossFamily parse_loss_family(std::string_view name) {
  if (name == "ce" || name == "cross_entropy" || name == "cross-entropy") return LossFamily::cross_entropy;
  if (name == "ls" || name == "label_smoothing" || name == "label-smoothing") return LossFamily::label_smoothing;
  if (name == "brier") return LossFamily::brier;
  if (name == "focal" || name == "fl") return LossFamily::focal;
  if (name == "flsd53" || name == "flsd-53") return LossFamily::flsd53;
  if (name == "fcl") return LossFamily::fcl;
  throw ValidationError(fmt::format("unknown loss '{}'", name));
}

void LossSpec::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma must be finite and >= 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be finite and >= 0");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in [0, 1)");
}

std::string describe(const LossSpec& spec) {
  switch (spec.family) {
    case LossFamily::label_smoothing: return fmt::format("ls(alpha={})", spec.alpha);
    case LossFamily::focal: return fmt::format("focal(gamma={})", spec.gamma);
    case LossFamily::fcl: return fmt::format("fcl(gamma={}, lambda={})", spec.gamma, spec.lambda);
    default: return to_string(spec.family);
  }
}

double flsd53_gamma(double true_class_prob) {
  return true_class_prob < 0.2 ? 5.0 : 3.0;
}

namespace {

void check_dims(const ProbVector& probs, const ProbVector& target) {
  if (probs.size() != target.size()) {
    throw ValidationError(fmt::format("dimension mismatch: {} predictions vs {} targets", probs.size(), target.size()));
  }
}

double clamped_log(double p) {
  return std::log(std::max(p, kLogFloor));
}

double cross_entropy_value(const ProbVector& p, std::span<const double> t) {
  double v = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (t[k] != 0.0) v -= t[k] * clamped_log(p[k]);
  }
  return v;
}

double focal_value(double gamma, const ProbVector& p, const ProbVector& t) {
  double v = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (t[k] != 0.0) v += t[k] * std::pow(1.0 - p[k], gamma) * -clamped_log(p[k]);
  }
  return v;
}

double brier_value(const ProbVector& p, const ProbVector& t) {
  double v = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double d = p[k] - t[k];
    v += d * d;
  }
  return v;
}

std::vector<double> smoothed(const ProbVector& t, double alpha) {
  std::vector<double> out(t.size());
  const double floor = alpha / static_cast<double>(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) out[k] = (1.0 - alpha) * t[k] + floor;
  return out;
}

double flsd53_spec_gamma(const ProbVector& p, const ProbVector& t) {
  return flsd53_gamma(p[t.argmax()]);
}

// Chain rule through softmax, given g_k * p_k where g = dL/dp.
std::vector<double> softmax_backward(const ProbVector& p, const std::vector<double>& pg) {
  double total = 0.0;
  for (double v : pg) total += v;
  std::vector<double> grad(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) grad[k] = pg[k] - p[k] * total;
  return grad;
}

std::vector<double> focal_grad(double gamma, const ProbVector& p, const ProbVector& t) {
  std::vector<double> pg(p.size(), 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (t[k] == 0.0) continue;
    const double q = 1.0 - p[k];
    double term = 0.0;
    if (gamma != 0.0 && q != 0.0) term = gamma * std::pow(q, gamma - 1.0) * p[k] * clamped_log(p[k]);
    if (p[k] > kLogFloor) term -= std::pow(q, gamma);
    pg[k] = t[k] * term;
  }
  return softmax_backward(p, pg);
}

std::vector<double> brier_grad(const ProbVector& p, const ProbVector& t) {
  std::vector<double> pg(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) pg[k] = 2.0 * p[k] * (p[k] - t[k]);
  return softmax_backward(p, pg);
}

}  // namespace

double eval_loss(const LossSpec& spec, const ProbVector& probs, const ProbVector& target) {
  spec.validate();
  check_dims(probs, target);
  switch (spec.family) {
    case LossFamily::cross_entropy: return cross_entropy_value(probs, target.values());
    case LossFamily::label_smoothing: return cross_entropy_value(probs, smoothed(target, spec.alpha));
    case LossFamily::brier: return brier_value(probs, target);
    case LossFamily::focal: return focal_value(spec.gamma, probs, target);
    case LossFamily::flsd53: return focal_value(flsd53_spec_gamma(probs, target), probs, target);
    case LossFamily::fcl: {
      const double focal = focal_value(spec.gamma, probs, target);
      if (spec.lambda == 0.0) return focal;
      return focal + spec.lambda * brier_value(probs, target);
    }
  }
  throw ValidationError("unknown loss family");
}

LossEval eval_loss_grad(const LossSpec& spec, std::span<const double> logits, const ProbVector& target) {
  const ProbVector p = ProbVector::from_logits(logits);
  LossEval out;
  out.value = eval_loss(spec, p, target);
  switch (spec.family) {
    case LossFamily::cross_entropy: {
      out.grad_logits.resize(p.size());
      for (std::size_t k = 0; k < p.size(); ++k) out.grad_logits[k] = p[k] - target[k];
      break;
    }
    case LossFamily::label_smoothing: {
      const auto t = smoothed(target, spec.alpha);
      out.grad_logits.resize(p.size());
      for (std::size_t k = 0; k < p.size(); ++k) out.grad_logits[k] = p[k] - t[k];
      break;
    }
    case LossFamily::brier: out.grad_logits = brier_grad(p, target); break;
    case LossFamily::focal: out.grad_logits = focal_grad(spec.gamma, p, target); break;
    case LossFamily::flsd53: out.grad_logits = focal_grad(flsd53_spec_gamma(p, target), p, target); break;
    case LossFamily::fcl: {
      out.grad_logits = focal_grad(spec.gamma, p, target);
      if (spec.lambda != 0.0) {
        const auto calib = brier_grad(p, target);
        for (std::size_t k = 0; k < p.size(); ++k) out.grad_logits[k] += spec.lambda * calib[k];
      }
      break;
    }
  }
  for (double g : out.grad_logits) {
    if (!std::isfinite(g)) throw ConvergenceError("non-finite loss gradient");
  }
  return out;
}

EntropyBound entropy_bound_check(const ProbVector& probs, const ProbVector& target, double gamma) {
  if (!(gamma >= 1.0)) throw ValidationError("entropy bound requires gamma >= 1");
  check_dims(probs, target);
  for (double p : probs) {
    if (!(p > 0.0)) throw ValidationError("entropy bound requires strictly positive probabilities");
  }
  double kl = 0.0;
  double h_target = 0.0;
  double h_probs = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (target[k] > 0.0) {
      kl += target[k] * std::log(target[k] / probs[k]);
      h_target -= target[k] * std::log(target[k]);
    }
    h_probs -= probs[k] * std::log(probs[k]);
  }
  EntropyBound out;
  out.lhs = eval_loss(LossSpec::focal(gamma), probs, target);
  out.rhs = kl + h_target - gamma * h_probs;
  out.holds = out.lhs >= out.rhs - 1e-12;
  return out;
}

ScalarDerivs focal_term(double gamma, double p) {
  const double q = 1.0 - p;
  const double nlog = -std::log(p);
  ScalarDerivs d;
  if (gamma == 0.0) {
    d.value = nlog;
    d.d1 = -1.0 / p;
    d.d2 = 1.0 / (p * p);
    return d;
  }
  if (q == 0.0) {
    // Limits at p = 1: the second derivative tends to gamma (gamma + 1) q^(gamma - 1).
    d.d2 = gamma == 1.0 ? 2.0 : (gamma > 1.0 ? 0.0 : INFINITY);
    return d;
  }
  const double a = std::pow(q, gamma);
  const double a1 = -gamma * std::pow(q, gamma - 1.0);
  const double a2 = gamma * (gamma - 1.0) * std::pow(q, gamma - 2.0);
  d.value = a * nlog;
  d.d1 = a1 * nlog - a / p;
  d.d2 = a2 * nlog - 2.0 * a1 / p + a / (p * p);
  return d;
}

SeparableRisk::SeparableRisk(const LossSpec& spec, std::span<const double> weights)
    : spec_(spec), weights_(weights.begin(), weights.end()) {
  spec_.validate();
  if (spec_.family == LossFamily::flsd53) {
    throw ValidationError("FLSD-53 has no convex separable risk (its gamma switches with the prediction)");
  }
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("risk weights must be finite and >= 0");
    total_ += w;
  }
  log_weights_ = weights_;
  if (spec_.family == LossFamily::label_smoothing) {
    const double share = spec_.alpha * total_ / static_cast<double>(weights_.size());
    for (auto& w : log_weights_) w = (1.0 - spec_.alpha) * w + share;
  }
}

ScalarDerivs SeparableRisk::term(std::size_t k, double p) const {
  ScalarDerivs out;
  const double w = weights_[k];
  auto add_log = [&](double weight) {
    if (weight == 0.0) return;
    out.value -= weight * std::log(p);
    out.d1 -= weight / p;
    out.d2 += weight / (p * p);
  };
  auto add_focal = [&](double gamma) {
    if (w == 0.0) return;
    const ScalarDerivs f = focal_term(gamma, p);
    out.value += w * f.value;
    out.d1 += w * f.d1;
    out.d2 += w * f.d2;
  };
  // sum_y w_y sum_k (p_k - [k = y])^2 = sum_k (W p_k^2 - 2 w_k p_k + w_k)
  auto add_quadratic = [&](double scale) {
    out.value += scale * (total_ * p * p - 2.0 * w * p + w);
    out.d1 += scale * (2.0 * total_ * p - 2.0 * w);
    out.d2 += scale * 2.0 * total_;
  };
  switch (spec_.family) {
    case LossFamily::cross_entropy:
    case LossFamily::label_smoothing: add_log(log_weights_[k]); break;
    case LossFamily::brier: add_quadratic(1.0); break;
    case LossFamily::focal: add_focal(spec_.gamma); break;
    case LossFamily::fcl:
      add_focal(spec_.gamma);
      if (spec_.lambda != 0.0) add_quadratic(spec_.lambda);
      break;
    case LossFamily::flsd53: break;
  }
  return out;
}

}  // namespace fcl
