#pragma once

#include <cstddef>
#include <vector>

#include "fcl/data.hpp"
#include "fcl/losses.hpp"
#include "fcl/metrics.hpp"

namespace fcl {

struct TemperatureScanConfig {
  double t_min = 0.1;
  double t_max = 10.0;
  double t_step = 0.1;
  std::size_t bins = kDefaultBins;
};

struct TemperaturePoint {
  double t = 0.0;
  double ece = 0.0;
};

struct TemperatureScanResult {
  double best_t = 1.0;
  std::vector<TemperaturePoint> grid;
  double pre_ece = 0.0;   // at T = 1
  double post_ece = 0.0;  // at best_t
};

/// t_min, t_min + step, ..., t_max. Values are rounded to 1e-9 so decimal
/// steps land on the nearest doubles, and 1.0 is inserted when missing.
std::vector<double> temperature_grid(double t_min, double t_max, double t_step);

/// Grid search for the temperature with the lowest ECE on `val`.
/// Ties go to the T closest to 1, then to the smaller T.
TemperatureScanResult temperature_scan(const PredictionSet& val, const TemperatureScanConfig& cfg = {});

/// Replaces every record's probabilities by softmax(z / t).
PredictionSet apply_temperature(const PredictionSet& set, double t);

// ---------------------------------------------------------------------------
// Post-processing gap

/// kappa at the sorted distinct predicted class-1 probabilities; the offset
/// kappa(v) - v is 1-Lipschitz between knots.
struct PostProcessMap {
  std::vector<double> knots;
  std::vector<double> kappa;

  bool feasible(double slack = 1e-12) const;
  /// Linear interpolation between knots; constant offset outside them.
  double operator()(double v) const;
};

struct PGapResult {
  double raw_risk = 0.0;
  double optimized_risk = 0.0;
  double pgap = 0.0;
  PostProcessMap map;
};

/// Loss of a binary prediction with class-1 probability q, i.e. of (1 - q, q).
double binary_loss(const LossSpec& spec, double q, std::size_t label);

/// Risk reduction available from the best admissible remap kappa of p_1.
///
/// Only for K = 2 and convex families (FLSD53 is rejected). The remap is
/// optimised by a log-barrier Newton method over the chain constraints
/// 0 <= kappa_{j+1} - kappa_j <= 2 (v_{j+1} - v_j) and 0 <= kappa <= 1; the
/// identity map is used whenever it is at least as good.
PGapResult pgap(const PredictionSet& set, const LossSpec& spec);

}  // namespace fcl
