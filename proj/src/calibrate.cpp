#include "fcl/calibrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "fcl/error.hpp"

namespace fcl {

std::vector<double> temperature_grid(double t_min, double t_max, double t_step) {
  if (!(t_min > 0.0) || !std::isfinite(t_min)) throw ValidationError("t-min must be > 0");
  if (!(t_step > 0.0) || !std::isfinite(t_step)) throw ValidationError("t-step must be > 0");
  if (!(t_max >= t_min) || !std::isfinite(t_max)) throw ValidationError("t-max must be >= t-min");
  const auto steps = static_cast<std::size_t>(std::floor((t_max - t_min) / t_step + 1e-9));
  std::vector<double> grid;
  grid.reserve(steps + 2);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = t_min + static_cast<double>(i) * t_step;
    grid.push_back(std::round(t * 1e9) / 1e9);
  }
  if (std::find(grid.begin(), grid.end(), 1.0) == grid.end()) {
    grid.insert(std::upper_bound(grid.begin(), grid.end(), 1.0), 1.0);
  }
  return grid;
}

PredictionSet apply_temperature(const PredictionSet& set, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError(fmt::format("temperature must be > 0, got {}", t));
  if (!set.has_logits()) throw ValidationError("temperature scaling needs logits");
  std::vector<PredictionRecord> out;
  out.reserve(set.size());
  for (const auto& r : set) {
    PredictionRecord rec = r;
    rec.probs = ProbVector::from_logits(*r.logits, t);
    out.push_back(std::move(rec));
  }
  return PredictionSet(std::move(out));
}

TemperatureScanResult temperature_scan(const PredictionSet& val, const TemperatureScanConfig& cfg) {
  if (!val.has_logits()) throw ValidationError("temperature scaling needs logits; probabilities cannot be rescaled");
  const auto grid = temperature_grid(cfg.t_min, cfg.t_max, cfg.t_step);
  TemperatureScanResult out;
  double best_ece = std::numeric_limits<double>::infinity();
  for (double t : grid) {
    const double e = ece(apply_temperature(val, t), cfg.bins);
    out.grid.push_back({t, e});
    if (t == 1.0) out.pre_ece = e;
    bool better = e < best_ece;
    if (e == best_ece) {
      const double d_new = std::abs(t - 1.0);
      const double d_old = std::abs(out.best_t - 1.0);
      better = d_new < d_old || (d_new == d_old && t < out.best_t);
    }
    if (better) {
      best_ece = e;
      out.best_t = t;
    }
  }
  out.post_ece = ece(apply_temperature(val, out.best_t), cfg.bins);
  return out;
}

// ---------------------------------------------------------------------------

bool PostProcessMap::feasible(double slack) const {
  if (knots.size() != kappa.size()) return false;
  for (std::size_t i = 0; i < kappa.size(); ++i) {
    if (kappa[i] < -slack || kappa[i] > 1.0 + slack) return false;
    if (i > 0) {
      const double step = knots[i] - knots[i - 1];
      const double delta = (kappa[i] - knots[i]) - (kappa[i - 1] - knots[i - 1]);
      if (std::abs(delta) > step + slack) return false;
    }
  }
  return true;
}

double PostProcessMap::operator()(double v) const {
  if (knots.empty()) return v;
  double out = 0.0;
  if (v <= knots.front()) {
    out = v + (kappa.front() - knots.front());
  } else if (v >= knots.back()) {
    out = v + (kappa.back() - knots.back());
  } else {
    const auto it = std::upper_bound(knots.begin(), knots.end(), v);
    const std::size_t j = static_cast<std::size_t>(it - knots.begin());
    const double w = (v - knots[j - 1]) / (knots[j] - knots[j - 1]);
    out = kappa[j - 1] + w * (kappa[j] - kappa[j - 1]);
  }
  return std::clamp(out, 0.0, 1.0);
}

double binary_loss(const LossSpec& spec, double q, std::size_t label) {
  if (label > 1) throw ValidationError("binary label must be 0 or 1");
  const double p1 = std::clamp(q, 0.0, 1.0);
  return eval_loss(spec, ProbVector({1.0 - p1, p1}), ProbVector::one_hot(2, label));
}

namespace {

// Log-barrier Newton method for
//   min (1/N) sum_j F_j(kappa_j)
//   s.t. kappa_1 >= 0, kappa_m <= 1, 0 <= kappa_{j+1} - kappa_j <= 2 (v_{j+1} - v_j).
class RemapSolver {
 public:
  RemapSolver(const LossSpec& spec, std::vector<double> knots, std::vector<std::array<double, 2>> counts, double n)
      : knots_(std::move(knots)), scale_(1.0 / n) {
    for (const auto& c : counts) terms_.emplace_back(spec, std::span<const double>(c));
  }

  std::vector<double> solve() {
    const std::size_t m = knots_.size();
    std::vector<double> x(m);
    for (std::size_t j = 0; j < m; ++j) x[j] = 0.5 * knots_[j] + 0.25;
    const double barriers = static_cast<double>(2 * m);
    for (double mu = 1.0;; mu *= 0.1) {
      centre(x, mu);
      if (mu * barriers <= 1e-10) break;
    }
    return x;
  }

 private:
  double step_cap(std::size_t j) const { return 2.0 * (knots_[j + 1] - knots_[j]); }

  bool interior(const std::vector<double>& x) const {
    const std::size_t m = x.size();
    if (!(x[0] > 0.0) || !(x[m - 1] < 1.0)) return false;
    for (std::size_t j = 0; j + 1 < m; ++j) {
      const double d = x[j + 1] - x[j];
      if (!(d > 0.0) || !(d < step_cap(j))) return false;
    }
    return true;
  }

  double objective(const std::vector<double>& x, double mu) const {
    const std::size_t m = x.size();
    double f = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      f += terms_[j].term(0, 1.0 - x[j]).value + terms_[j].term(1, x[j]).value;
    }
    double b = -std::log(x[0]) - std::log(1.0 - x[m - 1]);
    for (std::size_t j = 0; j + 1 < m; ++j) {
      const double d = x[j + 1] - x[j];
      b -= std::log(d) + std::log(step_cap(j) - d);
    }
    return scale_ * f + mu * b;
  }

  void centre(std::vector<double>& x, double mu) const {
    const std::size_t m = x.size();
    std::vector<double> g(m), diag(m), off(m > 1 ? m - 1 : 0), dir(m), trial(m);
    for (int iter = 0; iter < 200; ++iter) {
      std::fill(g.begin(), g.end(), 0.0);
      std::fill(diag.begin(), diag.end(), 0.0);
      std::fill(off.begin(), off.end(), 0.0);
      for (std::size_t j = 0; j < m; ++j) {
        const ScalarDerivs a = terms_[j].term(0, 1.0 - x[j]);
        const ScalarDerivs b = terms_[j].term(1, x[j]);
        g[j] = scale_ * (b.d1 - a.d1);
        diag[j] = scale_ * (a.d2 + b.d2);
      }
      const double lo = x[0];
      const double hi = 1.0 - x[m - 1];
      g[0] -= mu / lo;
      diag[0] += mu / (lo * lo);
      g[m - 1] += mu / hi;
      diag[m - 1] += mu / (hi * hi);
      for (std::size_t j = 0; j + 1 < m; ++j) {
        const double d = x[j + 1] - x[j];
        const double e = step_cap(j) - d;
        const double gd = -mu / d + mu / e;  // derivative of the pair's barrier in d
        const double hd = mu / (d * d) + mu / (e * e);
        g[j + 1] += gd;
        g[j] -= gd;
        diag[j] += hd;
        diag[j + 1] += hd;
        off[j] -= hd;
      }

      solve_tridiagonal(diag, off, g, dir);
      double slope = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        dir[j] = -dir[j];
        slope += g[j] * dir[j];
      }
      if (!(slope < 0.0) || !std::isfinite(slope)) {
        slope = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          dir[j] = -g[j];
          slope -= g[j] * g[j];
        }
        if (!(slope < 0.0)) return;
      }
      if (-slope * 0.5 <= 1e-14) return;

      const double f0 = objective(x, mu);
      double t = 1.0;
      bool moved = false;
      while (t > 1e-20) {
        for (std::size_t j = 0; j < m; ++j) trial[j] = x[j] + t * dir[j];
        if (interior(trial) && objective(trial, mu) <= f0 + 1e-4 * t * slope) {
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) return;
      x.swap(trial);
    }
  }

  // Symmetric tridiagonal solve (Thomas algorithm).
  static void solve_tridiagonal(const std::vector<double>& diag, const std::vector<double>& off,
                                const std::vector<double>& rhs, std::vector<double>& out) {
    const std::size_t m = diag.size();
    std::vector<double> c(m, 0.0);
    std::vector<double> d(m, 0.0);
    double denom = diag[0];
    c[0] = m > 1 ? off[0] / denom : 0.0;
    d[0] = rhs[0] / denom;
    for (std::size_t j = 1; j < m; ++j) {
      denom = diag[j] - off[j - 1] * c[j - 1];
      c[j] = j + 1 < m ? off[j] / denom : 0.0;
      d[j] = (rhs[j] - off[j - 1] * d[j - 1]) / denom;
    }
    out[m - 1] = d[m - 1];
    for (std::size_t j = m - 1; j-- > 0;) out[j] = d[j] - c[j] * out[j + 1];
  }

  std::vector<double> knots_;
  std::vector<SeparableRisk> terms_;
  double scale_;
};

}  // namespace

PGapResult pgap(const PredictionSet& set, const LossSpec& spec) {
  if (set.num_classes() != 2) {
    throw ValidationError(fmt::format("pgap needs binary predictions, got K = {}", set.num_classes()));
  }
  spec.validate();
  if (spec.family == LossFamily::flsd53) throw ValidationError("pgap needs a convex loss; FLSD-53 is not convex");

  std::vector<std::pair<double, std::size_t>> rows;
  rows.reserve(set.size());
  for (const auto& r : set) rows.emplace_back(r.probs[1], r.label);
  std::sort(rows.begin(), rows.end());

  std::vector<double> knots;
  std::vector<std::array<double, 2>> counts;
  for (const auto& [v, y] : rows) {
    if (knots.empty() || knots.back() != v) {
      knots.push_back(v);
      counts.push_back({0.0, 0.0});
    }
    counts.back()[y] += 1.0;
  }

  const double n = static_cast<double>(set.size());
  PGapResult out;
  for (const auto& [v, y] : rows) out.raw_risk += binary_loss(spec, v, y);
  out.raw_risk /= n;

  RemapSolver solver(spec, knots, counts, n);
  std::vector<double> kappa = solver.solve();
  for (auto& k : kappa) k = std::clamp(k, 0.0, 1.0);

  double optimized = 0.0;
  {
    std::size_t j = 0;
    for (const auto& [v, y] : rows) {
      while (knots[j] != v) ++j;
      optimized += binary_loss(spec, kappa[j], y);
    }
    optimized /= n;
  }

  out.map.knots = knots;
  if (optimized < out.raw_risk) {
    out.optimized_risk = optimized;
    out.map.kappa = std::move(kappa);
  } else {
    out.optimized_risk = out.raw_risk;
    out.map.kappa = knots;
  }
  out.pgap = out.raw_risk - out.optimized_risk;
  return out;
}

}  // namespace fcl
