#include "fcl/prob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "fcl/error.hpp"

namespace fcl {

ProbVector::ProbVector(std::vector<double> values, double tolerance) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw ValidationError(fmt::format("probability vector needs at least 2 entries, got {}", values_.size()));
  }
  double sum = 0.0;
  for (double& v : values_) {
    if (!std::isfinite(v)) throw ValidationError("probability entry is not finite");
    if (v < -tolerance || v > 1.0 + tolerance) {
      throw ValidationError(fmt::format("probability entry {} outside [0, 1]", v));
    }
    v = std::clamp(v, 0.0, 1.0);
    sum += v;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw ValidationError(fmt::format("probability mass {} deviates from 1 by more than {}", sum, tolerance));
  }

  const double rounding = 4.0 * static_cast<double>(values_.size()) * std::numeric_limits<double>::epsilon();
  if (std::abs(sum - 1.0) > rounding) {
    for (double& v : values_) v /= sum;
  }
}

std::vector<double> softmax(std::span<const double> logits, double temperature) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double zmax = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp((logits[k] - zmax) / temperature);
    sum += out[k];
  }
  for (double& v : out) v /= sum;
  return out;
}

ProbVector ProbVector::from_logits(std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  for (double z : logits) {
    if (!std::isfinite(z)) throw ValidationError("logit is not finite");
  }
  return ProbVector(softmax(logits, temperature));
}

ProbVector ProbVector::one_hot(std::size_t num_classes, std::size_t index) {
  if (index >= num_classes) throw ValidationError("one-hot index out of range");
  std::vector<double> v(num_classes, 0.0);
  v[index] = 1.0;
  return ProbVector(std::move(v));
}

ProbVector ProbVector::uniform(std::size_t num_classes) {
  return ProbVector(std::vector<double>(num_classes, 1.0 / static_cast<double>(num_classes)));
}

std::size_t ProbVector::argmax() const {
  return static_cast<std::size_t>(std::max_element(values_.begin(), values_.end()) - values_.begin());
}

}  // namespace fcl
