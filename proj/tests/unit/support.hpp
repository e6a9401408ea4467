#pragma once

#include <cmath>
#include <vector>

#include "fcl/data.hpp"
#include "fcl/rng.hpp"

namespace testing {

inline fcl::ProbVector random_simplex(fcl::Rng& rng, std::size_t k) {
  std::vector<double> v(k);
  double s = 0;
  for (auto& x : v) {
    x = -std::log(1.0 - rng.uniform());
    s += x;
  }
  for (auto& x : v) x /= s;
  return fcl::ProbVector(v);
}

inline fcl::PredictionRecord binary_record(double p1, std::size_t label) {
  return {fcl::ProbVector({1.0 - p1, p1}), label, {}, {}};
}

inline fcl::PredictionRecord logit_record(std::vector<double> z, std::size_t label) {
  auto p = fcl::ProbVector::from_logits(z);
  return {p, label, {}, std::move(z)};
}

}  // namespace testing
