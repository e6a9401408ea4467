#include <doctest.h>

#include "fcl/error.hpp"
#include "fcl/metrics.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace fcl;

TEST_CASE("single binary record") {
  const auto r = smce(PredictionSet({testing::binary_record(0.3, 0)}));
  CHECK(r.value == doctest::Approx(0.12).epsilon(1e-14));
  REQUIRE(r.witness.knots.size() == 2);
  CHECK(r.witness.feasible());
  CHECK(r.witness.values[1] - r.witness.values[0] == doctest::Approx(0.4));
}

TEST_CASE("chain program edge cases") {
  CHECK(max_lipschitz_correlation(std::vector<double>{}, std::vector<double>{}).value == 0.0);
  const auto one = max_lipschitz_correlation(std::vector<double>{0.5}, std::vector<double>{-2.0});
  CHECK(one.value == 2.0);
  CHECK(one.heights[0] == -1.0);
  const auto wide = max_lipschitz_correlation(std::vector<double>{0.0, 5.0}, std::vector<double>{1.0, -1.0});
  CHECK(wide.value == 2.0);
  CHECK_THROWS_AS(max_lipschitz_correlation(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 1.0}),
                  ValidationError);
  CHECK_THROWS_AS(max_lipschitz_correlation(std::vector<double>{0.5}, std::vector<double>{1.0, 1.0}), ValidationError);
}

TEST_CASE("chain program matches the grid oracle") {
  Rng rng(31);
  for (int inst = 0; inst < 60; ++inst) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<double> knots;
    long pos = static_cast<long>(rng.below(200));
    for (std::size_t i = 0; i < n; ++i) {
      knots.push_back(static_cast<double>(pos) / 1000.0);
      pos += 1 + static_cast<long>(rng.below(400));
    }
    std::vector<double> w(n);
    for (auto& x : w) x = rng.uniform(-1.0, 1.0);
    const auto sol = max_lipschitz_correlation(knots, w);
    CHECK(sol.value == doctest::Approx(oracle::lipschitz_grid_dp(knots, w)).epsilon(1e-9));
    LipschitzWitness wit{knots, sol.heights};
    CHECK(wit.feasible(1e-12));
    double attained = 0.0;
    for (std::size_t i = 0; i < n; ++i) attained += w[i] * sol.heights[i];
    CHECK(attained == doctest::Approx(sol.value).epsilon(1e-12));
  }
}

TEST_CASE("no random feasible witness beats the optimum") {
  Rng rng(32);
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t n = 2 + rng.below(6);
    std::vector<PredictionRecord> recs;
    for (std::size_t i = 0; i < n; ++i) recs.push_back({testing::random_simplex(rng, 3), rng.below(3), {}, {}});
    const PredictionSet set(recs);
    const auto r = smce(set);
    CHECK(r.value >= 0.0);
    CHECK(r.value <= 2.0);
    for (int trial = 0; trial < 1000; ++trial) {
      // Random walk clipped into the feasible region.
      double h = rng.uniform(-1.0, 1.0);
      double prev_u = r.witness.knots[0];
      double total = 0.0;
      std::vector<double> heights;
      for (std::size_t j = 0; j < r.witness.knots.size(); ++j) {
        const double u = r.witness.knots[j];
        if (j > 0) h = std::clamp(h + rng.uniform(-1.0, 1.0) * (u - prev_u), -1.0, 1.0);
        heights.push_back(h);
        prev_u = u;
      }
      for (const auto& rec : set) {
        for (std::size_t k = 0; k < 3; ++k) {
          const auto it = std::lower_bound(r.witness.knots.begin(), r.witness.knots.end(), rec.probs[k]);
          total += ((rec.label == k ? 1.0 : 0.0) - rec.probs[k]) * heights[static_cast<std::size_t>(it - r.witness.knots.begin())];
        }
      }
      CHECK(total / static_cast<double>(n) <= r.value + 1e-12);
    }
  }
}
