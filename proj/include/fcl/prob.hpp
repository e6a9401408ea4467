#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fcl {

/// A point on the probability simplex with K >= 2 entries.
///
/// Construction validates the entries (each in [0, 1], total mass within
/// `tolerance` of one) and then divides by the sum, so every instance sums to
/// one up to rounding. Rows whose sum is already one up to rounding are
/// stored unchanged, so a written-and-reread vector compares equal.
class ProbVector {
 public:
  static constexpr double kDefaultTolerance = 1e-8;

  explicit ProbVector(std::vector<double> values, double tolerance = kDefaultTolerance);

  /// softmax(logits / temperature), computed with the max-shift.
  static ProbVector from_logits(std::span<const double> logits, double temperature = 1.0);
  static ProbVector one_hot(std::size_t num_classes, std::size_t index);
  static ProbVector uniform(std::size_t num_classes);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  std::span<const double> values() const { return values_; }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  /// Index of the largest entry; ties go to the lowest index.
  std::size_t argmax() const;
  double max() const { return values_[argmax()]; }

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  std::vector<double> values_;
};

/// Softmax of `logits / temperature` as a raw vector (no validation).
std::vector<double> softmax(std::span<const double> logits, double temperature = 1.0);

}  // namespace fcl
