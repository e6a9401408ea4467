#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fcl/prob.hpp"

namespace fcl {

/// One scored example: predicted distribution, observed label, and, when the
/// data is synthetic, the true class posterior.
struct PredictionRecord {
  ProbVector probs;
  std::size_t label = 0;
  std::optional<ProbVector> eta;
  /// Raw logits when the row was ingested from logits; needed for rescaling.
  std::optional<std::vector<double>> logits;
};

/// Nonempty collection of records sharing one class count.
class PredictionSet {
 public:
  explicit PredictionSet(std::vector<PredictionRecord> records);

  std::size_t num_classes() const { return num_classes_; }
  std::size_t size() const { return records_.size(); }
  const PredictionRecord& operator[](std::size_t i) const { return records_[i]; }
  std::span<const PredictionRecord> records() const { return records_; }
  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

  /// True when every record carries logits.
  bool has_logits() const;

 private:
  std::vector<PredictionRecord> records_;
  std::size_t num_classes_ = 0;
};

enum class RowFormat { json_rows, csv_rows };
enum class InputKind { probs, logits };

RowFormat parse_row_format(std::string_view name);
InputKind parse_input_kind(std::string_view name);
/// `.csv` selects csv_rows, anything else json_rows.
RowFormat row_format_for(const std::filesystem::path& path);

/// Maximum deviation of a probability row's mass from one before it is rejected.
inline constexpr double kRowMassTolerance = 1e-6;

/// Reads newline-delimited JSON rows or header CSV rows.
///
/// JSON rows look like `{"probs":[...],"label":k}` or `{"logits":[...],"label":k}`
/// with an optional `"eta":[...]`. CSV needs a header `p_0,...,p_{K-1},label`
/// (probabilities) or `z_0,...,z_{K-1},label` (logits). Errors name the line.
PredictionSet parse_predictions(std::istream& in, RowFormat format, InputKind kind);
PredictionSet load_predictions(const std::filesystem::path& path, RowFormat format, InputKind kind);

/// Writes JSON rows; records with logits are written as `"logits"` rows
/// when `prefer_logits` is set, otherwise as `"probs"` rows.
void write_predictions(std::ostream& out, const PredictionSet& set, bool prefer_logits);

// ---------------------------------------------------------------------------
// Synthetic data

enum class SyntheticKind { moons, gauss2 };

SyntheticKind parse_synthetic_kind(std::string_view name);

struct SyntheticConfig {
  SyntheticKind kind = SyntheticKind::moons;
  std::size_t n = 1000;
  /// Noise standard deviation (moons) or per-component spread (gauss2).
  double noise = 0.2;
  std::uint64_t seed = 1;
  /// Distance between the two gauss2 means.
  double class_sep = 2.0;
};

struct LabeledPoint {
  std::array<double, 2> x{};
  int label = 0;
  std::optional<ProbVector> eta;

  friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

/// Two interleaving half circles: class 0 (ceil(n/2) points) on the upper unit
/// arc centred at the origin, class 1 (floor(n/2) points) on the lower arc
/// centred at (1, 0.5), both with isotropic Gaussian noise.
std::vector<LabeledPoint> gen_moons(const SyntheticConfig& cfg);

/// Equal-prior mixture of N((-sep/2, 0), s^2 I) and N((+sep/2, 0), s^2 I).
/// Every point stores its exact posterior.
std::vector<LabeledPoint> gen_gauss2(const SyntheticConfig& cfg);

/// Dispatches on cfg.kind.
std::vector<LabeledPoint> generate(const SyntheticConfig& cfg);

/// P(y = 1 | x) for the gauss2 generator; only the first coordinate matters.
double gauss2_posterior(double x0, double class_sep, double spread);

/// CSV with header `x0,x1,label` (plus `eta_0,eta_1` when posteriors are known).
void write_points(std::ostream& out, std::span<const LabeledPoint> points);
std::vector<LabeledPoint> read_points(std::istream& in);
std::vector<LabeledPoint> load_points(const std::filesystem::path& path);

}  // namespace fcl
