#include "fcl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "fcl/error.hpp"
#include "fcl/io.hpp"
#include "fcl/losses.hpp"

namespace fcl {

BinScheme parse_bin_scheme(std::string_view name) {
  if (name == "equal_width" || name == "equal-width" || name == "width") return BinScheme::equal_width;
  if (name == "equal_mass" || name == "equal-mass" || name == "mass") return BinScheme::equal_mass;
  throw ValidationError(fmt::format("unknown binning scheme '{}'", name));
}

ClasswiseNorm parse_classwise_norm(std::string_view name) {
  if (name == "global") return ClasswiseNorm::global;
  if (name == "per-class" || name == "per_class") return ClasswiseNorm::per_class;
  throw ValidationError(fmt::format("unknown classwise normalisation '{}'", name));
}

double BinSummary::gap() const {
  return std::abs(accuracy - confidence);
}

namespace {

void check_bins(std::size_t bins) {
  if (bins < 1) throw ValidationError("number of bins must be >= 1");
}

double edge(std::size_t m, std::size_t bins) {
  return static_cast<double>(m) / static_cast<double>(bins);
}

struct BinAccumulator {
  std::size_t count = 0;
  double hits = 0.0;
  double confidence = 0.0;

  void add(double conf, bool hit) {
    ++count;
    confidence += conf;
    if (hit) hits += 1.0;
  }

  BinSummary finish(double lo, double hi) const {
    BinSummary b{lo, hi, count, 0.0, 0.0};
    if (count > 0) {
      b.accuracy = hits / static_cast<double>(count);
      b.confidence = confidence / static_cast<double>(count);
    }
    return b;
  }
};

double weighted_gap(std::span<const BinSummary> bins, double total) {
  double out = 0.0;
  for (const auto& b : bins) {
    if (b.count == 0) continue;
    out += static_cast<double>(b.count) / total * b.gap();
  }
  return out;
}

}  // namespace

std::size_t equal_width_bin(double confidence, std::size_t bins) {
  check_bins(bins);
  if (!(confidence > 0.0)) return 0;
  const double scaled = std::ceil(confidence * static_cast<double>(bins));
  std::size_t m = scaled < 1.0 ? 0 : std::min(static_cast<std::size_t>(scaled) - 1, bins - 1);
  while (m > 0 && confidence <= edge(m, bins)) --m;
  while (m + 1 < bins && confidence > edge(m + 1, bins)) ++m;
  return m;
}

std::vector<BinSummary> bin_predictions(const PredictionSet& set, const BinningConfig& cfg) {
  check_bins(cfg.bins);
  std::vector<BinSummary> out;
  out.reserve(cfg.bins);

  if (cfg.scheme == BinScheme::equal_width) {
    std::vector<BinAccumulator> acc(cfg.bins);
    for (const auto& r : set) {
      const std::size_t top = r.probs.argmax();
      const double conf = r.probs[top];
      acc[equal_width_bin(conf, cfg.bins)].add(conf, top == r.label);
    }
    for (std::size_t m = 0; m < cfg.bins; ++m) out.push_back(acc[m].finish(edge(m, cfg.bins), edge(m + 1, cfg.bins)));
    return out;
  }

  const std::size_t n = set.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return set[a].probs.max() < set[b].probs.max(); });
  const std::size_t base = n / cfg.bins;
  const std::size_t extra = n % cfg.bins;
  std::size_t pos = 0;
  double last_hi = 0.0;
  for (std::size_t m = 0; m < cfg.bins; ++m) {
    const std::size_t len = base + (m < extra ? 1 : 0);
    BinAccumulator acc;
    double lo = last_hi;
    double hi = last_hi;
    for (std::size_t j = 0; j < len; ++j, ++pos) {
      const auto& r = set[order[pos]];
      const std::size_t top = r.probs.argmax();
      const double conf = r.probs[top];
      if (j == 0) lo = conf;
      hi = conf;
      acc.add(conf, top == r.label);
    }
    last_hi = hi;
    out.push_back(acc.finish(lo, hi));
  }
  return out;
}

double ece(const PredictionSet& set, std::size_t bins) {
  const auto summary = bin_predictions(set, {bins, BinScheme::equal_width});
  return weighted_gap(summary, static_cast<double>(set.size()));
}

double mce(const PredictionSet& set, const BinningConfig& cfg) {
  double worst = 0.0;
  for (const auto& b : bin_predictions(set, cfg)) {
    if (b.count > 0) worst = std::max(worst, b.gap());
  }
  return worst;
}

double adaece(const PredictionSet& set, std::size_t bins) {
  const auto summary = bin_predictions(set, {bins, BinScheme::equal_mass});
  return weighted_gap(summary, static_cast<double>(set.size()));
}

double classwise_ece(const PredictionSet& set, std::size_t bins, ClasswiseNorm norm) {
  check_bins(bins);
  const std::size_t num_classes = set.num_classes();
  const double n = static_cast<double>(set.size());
  double total = 0.0;
  for (std::size_t k = 0; k < num_classes; ++k) {
    std::vector<BinAccumulator> acc(bins);
    std::size_t class_count = 0;
    for (const auto& r : set) {
      acc[equal_width_bin(r.probs[k], bins)].add(r.probs[k], r.label == k);
      if (r.label == k) ++class_count;
    }
    double denom = n;
    if (norm == ClasswiseNorm::per_class) {
      if (class_count == 0) continue;
      denom = static_cast<double>(class_count);
    }
    double class_term = 0.0;
    for (std::size_t m = 0; m < bins; ++m) {
      const BinSummary b = acc[m].finish(edge(m, bins), edge(m + 1, bins));
      if (b.count == 0) continue;
      class_term += static_cast<double>(b.count) / denom * b.gap();
    }
    total += class_term;
  }
  return total / static_cast<double>(num_classes);
}

ScoreMetrics score_metrics(const PredictionSet& set) {
  double nll = 0.0;
  double brier = 0.0;
  double wrong = 0.0;
  for (const auto& r : set) {
    nll -= std::log(std::max(r.probs[r.label], kLogFloor));
    for (std::size_t k = 0; k < r.probs.size(); ++k) {
      const double d = r.probs[k] - (k == r.label ? 1.0 : 0.0);
      brier += d * d;
    }
    if (r.probs.argmax() != r.label) wrong += 1.0;
  }
  const double n = static_cast<double>(set.size());
  return {nll / n, brier / n, wrong / n};
}

double auroc(std::span<const double> scores_pos, std::span<const double> scores_neg) {
  if (scores_pos.empty() || scores_neg.empty()) throw ValidationError("AUROC needs positive and negative scores");
  std::vector<double> neg(scores_neg.begin(), scores_neg.end());
  for (double s : neg) {
    if (std::isnan(s)) throw ValidationError("AUROC score is NaN");
  }
  std::sort(neg.begin(), neg.end());
  // Twice the Mann-Whitney U statistic.
  std::uint64_t twice_u = 0;
  for (double s : scores_pos) {
    if (std::isnan(s)) throw ValidationError("AUROC score is NaN");
    const auto lo = std::lower_bound(neg.begin(), neg.end(), s);
    const auto hi = std::upper_bound(lo, neg.end(), s);
    twice_u += 2 * static_cast<std::uint64_t>(lo - neg.begin()) + static_cast<std::uint64_t>(hi - lo);
  }
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(scores_pos.size()) * static_cast<double>(scores_neg.size()));
}

std::vector<BinSummary> reliability_table(const PredictionSet& set, const BinningConfig& cfg) {
  return bin_predictions(set, cfg);
}

void write_reliability_csv(std::ostream& out, std::span<const BinSummary> bins) {
  out << "lo,hi,count,accuracy,confidence,gap\n";
  for (const auto& b : bins) {
    out << format_double(b.lo) << ',' << format_double(b.hi) << ',' << b.count << ',' << format_double(b.accuracy)
        << ',' << format_double(b.confidence) << ',' << format_double(b.gap()) << '\n';
  }
}

MetricReport evaluate(const PredictionSet& set, const BinningConfig& cfg, ClasswiseNorm norm) {
  MetricReport r;
  r.ece = ece(set, cfg.bins);
  r.mce = mce(set, {cfg.bins, BinScheme::equal_width});
  r.adaece = adaece(set, cfg.bins);
  r.cwece = classwise_ece(set, cfg.bins, norm);
  r.smce = smce(set).value;
  const auto scores = score_metrics(set);
  r.nll = scores.nll;
  r.brier = scores.brier;
  r.error = scores.error;
  if (set.num_classes() == 2) {
    std::vector<double> pos;
    std::vector<double> neg;
    for (const auto& rec : set) (rec.label == 1 ? pos : neg).push_back(rec.probs[1]);
    if (!pos.empty() && !neg.empty()) r.auroc = auroc(pos, neg);
  }
  r.bins = reliability_table(set, cfg);
  return r;
}

}  // namespace fcl
