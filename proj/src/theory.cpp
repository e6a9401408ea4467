#include "fcl/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "fcl/error.hpp"

namespace fcl {

double pointwise_risk(const LossSpec& spec, const ProbVector& q, const ProbVector& eta) {
  if (q.size() != eta.size()) {
    throw ValidationError(fmt::format("dimension mismatch: q has {} classes, eta {}", q.size(), eta.size()));
  }
  double risk = 0.0;
  for (std::size_t y = 0; y < eta.size(); ++y) {
    if (eta[y] == 0.0) continue;
    risk += eta[y] * eval_loss(spec, q, ProbVector::one_hot(eta.size(), y));
  }
  return risk;
}

namespace {

// Smallest q in [floor, 1] with h'(q) >= mu, h' nondecreasing.
double solve_coordinate(const SeparableRisk& risk, std::size_t k, double mu) {
  double lo = kMinimizerFloor;
  double hi = 1.0;
  if (risk.term(k, lo).d1 >= mu) return lo;
  if (risk.term(k, hi).d1 <= mu) return hi;
  for (int i = 0; i < 2000; ++i) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double g = risk.term(k, mid).d1 - mu;
    if (g == 0.0) return mid;
    (g < 0.0 ? lo : hi) = mid;
  }
  return std::abs(risk.term(k, lo).d1 - mu) < std::abs(risk.term(k, hi).d1 - mu) ? lo : hi;
}

struct Allocation {
  std::vector<double> q;
  double total = 0.0;
};

Allocation allocate(const SeparableRisk& risk, double mu) {
  Allocation a;
  a.q.resize(risk.size());
  for (std::size_t k = 0; k < risk.size(); ++k) {
    a.q[k] = solve_coordinate(risk, k, mu);
    a.total += a.q[k];
  }
  return a;
}

}  // namespace

MinimizerResult minimize_risk(const LossSpec& spec, const ProbVector& eta) {
  spec.validate();
  if (spec.family == LossFamily::flsd53) {
    throw ValidationError("FLSD-53 risk is not convex; no simplex minimizer is provided");
  }
  const std::size_t num_classes = eta.size();
  const SeparableRisk risk(spec, eta.values());

  // At mu = min_k h_k'(1/K) every q_k(mu) <= 1/K, and symmetrically for the max.
  const double centre = 1.0 / static_cast<double>(num_classes);
  double mu_lo = std::numeric_limits<double>::infinity();
  double mu_hi = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < num_classes; ++k) {
    const double d = risk.term(k, centre).d1;
    mu_lo = std::min(mu_lo, d);
    mu_hi = std::max(mu_hi, d);
  }

  MinimizerResult out;
  Allocation lo = allocate(risk, mu_lo);
  Allocation hi = allocate(risk, mu_hi);
  double mu = mu_lo;
  Allocation best = lo;
  if (std::abs(hi.total - 1.0) < std::abs(best.total - 1.0)) {
    best = hi;
    mu = mu_hi;
  }
  while (best.total != 1.0 && out.iterations < 4000) {
    ++out.iterations;
    const double mid = mu_lo + 0.5 * (mu_hi - mu_lo);
    if (mid <= mu_lo || mid >= mu_hi) break;
    Allocation a = allocate(risk, mid);
    const bool low = a.total < 1.0;
    if (std::abs(a.total - 1.0) <= std::abs(best.total - 1.0)) {
      best = a;
      mu = mid;
    }
    if (low) {
      mu_lo = mid;
    } else {
      mu_hi = mid;
    }
  }

  double residual = std::abs(best.total - 1.0);
  const double mu_scale = std::max(1.0, std::abs(mu));
  for (std::size_t k = 0; k < num_classes; ++k) {
    const double d = risk.term(k, best.q[k]).d1;
    if (best.q[k] > kMinimizerFloor && best.q[k] < 1.0) {
      residual = std::max(residual, std::abs(d - mu) / mu_scale);
    } else if (best.q[k] <= kMinimizerFloor) {
      residual = std::max(residual, std::max(0.0, mu - d) / mu_scale);
      out.boundary = true;
    } else {
      residual = std::max(residual, std::max(0.0, d - mu) / mu_scale);
    }
  }
  out.kkt_residual = residual;
  out.converged = residual <= 1e-8;
  out.q_star = ProbVector(best.q);
  out.objective = pointwise_risk(spec, out.q_star, eta);
  return out;
}

double sigma_eval(const SigmaSpec& spec, double q) {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError(fmt::format("sigma needs q in (0, 1), got {}", q));
  const double g = spec.gamma;
  const double r = 1.0 - q;
  double value = std::pow(r, g) - 2.0 * spec.lambda * q;
  if (g != 0.0) value -= g * q * std::log(q) * std::pow(r, g - 1.0);
  return value;
}

double sigma_root(const SigmaSpec& spec) {
  if (!(spec.gamma >= 0.0) || !std::isfinite(spec.gamma)) throw ValidationError("gamma must be finite and >= 0");
  if (!(spec.lambda >= 0.0) || !std::isfinite(spec.lambda)) throw ValidationError("lambda must be finite and >= 0");
  if (spec.lambda == 0.0) throw ValidationError("lambda = 0: sigma has no interior root (it tends to 0 as q -> 1)");
  double lo = 1e-12;
  double hi = 1.0 - 1e-12;
  double f_lo = sigma_eval(spec, lo);
  double f_hi = sigma_eval(spec, hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw ValidationError(fmt::format("sigma does not change sign on (0, 1) for gamma = {}, lambda = {}",
                                      spec.gamma, spec.lambda));
  }
  while (true) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double f = sigma_eval(spec, mid);
    if (f == 0.0) return mid;
    if ((f > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f;
    } else {
      hi = mid;
      f_hi = f;
    }
  }
  return std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
}

std::vector<CurvePoint> optimal_curve(const LossSpec& spec, std::span<const double> q_grid) {
  std::vector<CurvePoint> out;
  out.reserve(q_grid.size());
  for (double q : q_grid) {
    if (!(q >= 0.0 && q <= 1.0)) throw ValidationError(fmt::format("curve grid value {} outside [0, 1]", q));
    const MinimizerResult r = minimize_risk(spec, ProbVector({q, 1.0 - q}));
    if (!r.converged) {
      throw ConvergenceError(fmt::format("minimizer did not converge at q = {} (KKT residual {})", q, r.kkt_residual));
    }
    out.push_back({q, r.q_star[0]});
  }
  return out;
}

std::vector<double> unit_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw ValidationError("grid step must be in (0, 1]");
  const double n_real = std::round(1.0 / step);
  if (std::abs(n_real * step - 1.0) > 1e-9) throw ValidationError("grid step must divide 1");
  const auto n = static_cast<std::size_t>(n_real);
  std::vector<double> grid(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid[i] = static_cast<double>(i) / static_cast<double>(n);
  return grid;
}

OcUcBound oc_uc_bound(const ProbVector& p_hat, const ProbVector& eta) {
  if (p_hat.size() != eta.size()) throw ValidationError("dimension mismatch between prediction and posterior");
  OcUcBound b;
  b.lhs = std::abs(p_hat.max() - eta.max());
  double sq = 0.0;
  for (std::size_t k = 0; k < eta.size(); ++k) {
    const double d = p_hat[k] - eta[k];
    b.inf_norm = std::max(b.inf_norm, std::abs(d));
    sq += d * d;
  }
  b.rhs_l2 = std::sqrt(sq);
  constexpr double slack = 1e-12;
  b.holds = b.lhs <= b.rhs_l2 + slack;
  b.chain_holds = b.lhs <= b.inf_norm + slack && b.inf_norm <= b.rhs_l2 + slack;
  return b;
}

bool order_preservation_check(const LossSpec& spec, const ProbVector& eta) {
  for (std::size_t i = 0; i < eta.size(); ++i) {
    for (std::size_t j = i + 1; j < eta.size(); ++j) {
      if (eta[i] == eta[j]) throw ValidationError("order preservation needs distinct posterior entries");
    }
  }
  const MinimizerResult r = minimize_risk(spec, eta);
  if (!r.converged) throw ConvergenceError(fmt::format("minimizer did not converge (KKT residual {})", r.kkt_residual));
  for (std::size_t i = 0; i < eta.size(); ++i) {
    for (std::size_t j = 0; j < eta.size(); ++j) {
      if (eta[i] > eta[j] && !(r.q_star[i] > r.q_star[j])) return false;
    }
  }
  return true;
}

}  // namespace fcl
