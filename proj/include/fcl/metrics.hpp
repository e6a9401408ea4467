#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fcl/data.hpp"

namespace fcl {

enum class BinScheme { equal_width, equal_mass };
BinScheme parse_bin_scheme(std::string_view name);

inline constexpr std::size_t kDefaultBins = 15;

struct BinningConfig {
  std::size_t bins = kDefaultBins;
  BinScheme scheme = BinScheme::equal_width;
};

/// Accuracy and mean confidence of one bin. Both are zero for an empty bin.
struct BinSummary {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double accuracy = 0.0;
  double confidence = 0.0;

  /// |accuracy - confidence|
  double gap() const;
};

/// Equal-width bin index for a confidence in [0, 1]: intervals (m/M, (m+1)/M],
/// with 0 placed in the first bin.
std::size_t equal_width_bin(double confidence, std::size_t bins);

/// Bins records by top-class confidence.
///
/// equal_width uses the intervals of equal_width_bin. equal_mass stable-sorts
/// by confidence and cuts the order into runs whose sizes differ by at most
/// one (the first N mod M runs are the longer ones); lo/hi are then the
/// smallest and largest confidence in the run.
std::vector<BinSummary> bin_predictions(const PredictionSet& set, const BinningConfig& cfg);

/// sum_m |B_m|/N |acc - conf| over equal-width bins.
double ece(const PredictionSet& set, std::size_t bins = kDefaultBins);
/// max_m |acc - conf| over nonempty bins.
double mce(const PredictionSet& set, const BinningConfig& cfg);
/// ECE over equal-mass bins.
double adaece(const PredictionSet& set, std::size_t bins = kDefaultBins);

/// Normaliser for the per-class terms of classwise ECE: the total sample count
/// or the number of samples labelled with that class.
enum class ClasswiseNorm { global, per_class };
ClasswiseNorm parse_classwise_norm(std::string_view name);

/// (1/K) sum_k sum_m |B_km|/N |freq(y = k) - mean p_k| with equal-width bins on p_k.
double classwise_ece(const PredictionSet& set, std::size_t bins = kDefaultBins,
                     ClasswiseNorm norm = ClasswiseNorm::global);

struct ScoreMetrics {
  double nll = 0.0;
  double brier = 0.0;
  double error = 0.0;
};

/// Mean clamped NLL, mean multiclass Brier, and top-1 error rate.
ScoreMetrics score_metrics(const PredictionSet& set);

/// Mann-Whitney AUROC with half credit for ties.
double auroc(std::span<const double> scores_pos, std::span<const double> scores_neg);

/// Same bins as bin_predictions; exported with a gap column.
std::vector<BinSummary> reliability_table(const PredictionSet& set, const BinningConfig& cfg);

/// CSV with header `lo,hi,count,accuracy,confidence,gap`.
void write_reliability_csv(std::ostream& out, std::span<const BinSummary> bins);

// ---------------------------------------------------------------------------
// Smooth calibration error

/// Piecewise-linear witness given by its values at sorted knots.
struct LipschitzWitness {
  std::vector<double> knots;
  std::vector<double> values;

  /// Consecutive slopes at most 1 and values in [-1, 1], up to `slack`.
  bool feasible(double slack = 1e-12) const;
};

struct SmceResult {
  double value = 0.0;
  LipschitzWitness witness;
};

/// Exact maximum of sum_i w_i h_i over 1-Lipschitz h with |h| <= 1, for
/// weights w at strictly increasing knots. Returns the optimum and an
/// optimal h at the knots.
struct ChainLpSolution {
  double value = 0.0;
  std::vector<double> heights;
};
ChainLpSolution max_lipschitz_correlation(std::span<const double> knots, std::span<const double> weights);

/// smCE: pools every (p_k, y_k - p_k) pair, merges equal predictions, and
/// solves the Lipschitz program exactly. The value is divided by the number
/// of samples.
SmceResult smce(const PredictionSet& set);

// ---------------------------------------------------------------------------

struct MetricReport {
  double ece = 0.0;
  double mce = 0.0;
  double adaece = 0.0;
  double cwece = 0.0;
  double smce = 0.0;
  double nll = 0.0;
  double brier = 0.0;
  double error = 0.0;
  /// Binary sets only: p_1 scored against label 1.
  std::optional<double> auroc;
  std::vector<BinSummary> bins;
};

/// Every metric at once. ECE/MCE use equal-width bins, AdaECE equal-mass bins,
/// both with cfg.bins; `bins` is the reliability table under cfg.
MetricReport evaluate(const PredictionSet& set, const BinningConfig& cfg = {},
                      ClasswiseNorm norm = ClasswiseNorm::global);

}  // namespace fcl
