#include <algorithm>
#include <cmath>
#include <deque>
#include <utility>

#include "fcl/error.hpp"
#include "fcl/metrics.hpp"

namespace fcl {

bool LipschitzWitness::feasible(double slack) const {
  if (knots.size() != values.size()) return false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::abs(values[i]) > 1.0 + slack) return false;
    if (i > 0 && std::abs(values[i] - values[i - 1]) > knots[i] - knots[i - 1] + slack) return false;
  }
  return true;
}

namespace {

// Concave piecewise-linear function on [-1, 1] kept as breakpoints on each side
// of a flat-or-sloped middle piece. Each breakpoint stores the drop in slope
// across it; positions are relative to a per-side offset so a window shifts in O(1).
class ConcaveChain {
 public:
  void add_linear(double w) {
    slope_ += w;
    value_ += w * x_;
  }

  // Walks breakpoints until x_ is a maximiser and value_ is the maximum.
  void climb() {
    while (slope_ > 0.0) {
      const double end = right_.empty() ? 1.0 : right_.back().first + off_right_;
      value_ += slope_ * (end - x_);
      x_ = end;
      if (right_.empty()) break;
      const double c = right_.back().second;
      if (slope_ - c <= 0.0) break;
      right_.pop_back();
      left_.emplace_back(end - off_left_, c);
      slope_ -= c;
    }
    while (slope_ < 0.0) {
      const double end = left_.empty() ? -1.0 : left_.back().first + off_left_;
      value_ += slope_ * (end - x_);
      x_ = end;
      if (left_.empty()) break;
      const double c = left_.back().second;
      if (slope_ + c >= 0.0) break;
      left_.pop_back();
      right_.emplace_back(end - off_right_, c);
      slope_ += c;
    }
  }

  // h(x) <- max over |y - x| <= d of h(y), restricted to [-1, 1].
  void window(double d) {
    if (slope_ > 0.0) {
      const bool vertex = !right_.empty() && x_ == right_.back().first + off_right_;
      if (vertex) {
        const double c = right_.back().second;
        right_.pop_back();
        if (c - slope_ > 0.0) right_.emplace_back(x_ - off_right_, c - slope_);
      }
      left_.emplace_back(x_ - off_left_, slope_);
    } else if (slope_ < 0.0) {
      const bool vertex = !left_.empty() && x_ == left_.back().first + off_left_;
      if (vertex) {
        const double c = left_.back().second;
        left_.pop_back();
        if (c + slope_ > 0.0) left_.emplace_back(x_ - off_left_, c + slope_);
      }
      right_.emplace_back(x_ - off_right_, -slope_);
    }
    slope_ = 0.0;
    off_left_ -= d;
    off_right_ += d;
    while (!left_.empty() && left_.front().first + off_left_ <= -1.0) left_.pop_front();
    while (!right_.empty() && right_.front().first + off_right_ >= 1.0) right_.pop_front();
  }

  double argmax() const { return x_; }
  double max_value() const { return value_; }

 private:
  std::deque<std::pair<double, double>> left_;
  std::deque<std::pair<double, double>> right_;
  double off_left_ = 0.0;
  double off_right_ = 0.0;
  double slope_ = 0.0;
  double x_ = 0.0;
  double value_ = 0.0;
};

}  // namespace

ChainLpSolution max_lipschitz_correlation(std::span<const double> knots, std::span<const double> weights) {
  if (knots.size() != weights.size()) throw ValidationError("knots and weights differ in length");
  ChainLpSolution out;
  const std::size_t n = knots.size();
  if (n == 0) return out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(knots[i]) || !std::isfinite(weights[i])) throw ValidationError("non-finite knot or weight");
    if (i > 0 && !(knots[i] > knots[i - 1])) throw ValidationError("knots must be strictly increasing");
  }

  ConcaveChain chain;
  std::vector<double> best(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) chain.window(knots[i] - knots[i - 1]);
    chain.add_linear(weights[i]);
    chain.climb();
    best[i] = chain.argmax();
  }

  out.heights.assign(n, 0.0);
  out.heights[n - 1] = best[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    const double d = knots[i + 1] - knots[i];
    const double next = out.heights[i + 1];
    out.heights[i] = std::clamp(best[i], next - d, next + d);
  }
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) value += weights[i] * out.heights[i];
  out.value = chain.max_value();
  (void)value;
  return out;
}

SmceResult smce(const PredictionSet& set) {
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(set.size() * set.num_classes());
  for (const auto& r : set) {
    for (std::size_t k = 0; k < r.probs.size(); ++k) {
      const double y = r.label == k ? 1.0 : 0.0;
      pairs.emplace_back(r.probs[k], y - r.probs[k]);
    }
  }
  std::sort(pairs.begin(), pairs.end());

  std::vector<double> knots;
  std::vector<double> weights;
  for (const auto& [u, w] : pairs) {
    if (!knots.empty() && knots.back() == u) {
      weights.back() += w;
    } else {
      knots.push_back(u);
      weights.push_back(w);
    }
  }

  auto sol = max_lipschitz_correlation(knots, weights);
  SmceResult out;
  out.value = std::max(0.0, sol.value) / static_cast<double>(set.size());
  out.witness.knots = std::move(knots);
  out.witness.values = std::move(sol.heights);
  return out;
}

}  // namespace fcl
