#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fcl/error.hpp"
#include "fcl/prob.hpp"
#include "fcl/rng.hpp"

using namespace fcl;

TEST_CASE("ProbVector validates its entries") {
  CHECK_THROWS_AS(ProbVector({1.0}), ValidationError);
  CHECK_THROWS_AS(ProbVector({0.5, 0.6}), ValidationError);
  CHECK_THROWS_AS(ProbVector({-0.1, 1.1}), ValidationError);
  CHECK_THROWS_AS(ProbVector({NAN, 1.0}), ValidationError);
  const ProbVector p({0.25, 0.75});
  CHECK(p.size() == 2);
  CHECK(p.argmax() == 1);
  CHECK(p.max() == 0.75);
}

TEST_CASE("ProbVector renormalises rows within tolerance") {
  const ProbVector p({0.3 + 5e-9, 0.7}, 1e-8);
  CHECK(std::abs(p[0] + p[1] - 1.0) < 1e-15);
  const ProbVector q({1e-10 * -0.5, 1.0}, 1e-8);
  CHECK(q[0] == 0.0);
}

TEST_CASE("argmax takes the first maximum") {
  CHECK(ProbVector({0.4, 0.4, 0.2}).argmax() == 0);
}

TEST_CASE("softmax with temperature") {
  const auto p = ProbVector::from_logits(std::vector<double>{2.0, 0.0});
  CHECK(p[0] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-15));
  const auto hot = ProbVector::from_logits(std::vector<double>{2.0, 0.0}, 1e6);
  CHECK(hot[0] == doctest::Approx(0.5).epsilon(1e-5));
  const auto big = ProbVector::from_logits(std::vector<double>{1000.0, 0.0});
  CHECK(big[0] == 1.0);
  CHECK_THROWS_AS(ProbVector::from_logits(std::vector<double>{1.0, INFINITY}), ValidationError);
  CHECK_THROWS_AS(ProbVector::from_logits(std::vector<double>{1.0, 0.0}, 0.0), ValidationError);
}

TEST_CASE("one_hot and uniform") {
  const auto e = ProbVector::one_hot(3, 2);
  CHECK(e[2] == 1.0);
  CHECK(e[0] == 0.0);
  CHECK_THROWS_AS(ProbVector::one_hot(3, 3), ValidationError);
  CHECK(ProbVector::uniform(4)[3] == 0.25);
}

TEST_CASE("Rng is reproducible and in range") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK(a.next() != c.next());
  Rng r(1);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 5000; ++i) counts[r.below(5)]++;
  for (int n : counts) CHECK(n > 800);
}

TEST_CASE("Rng normals have unit scale") {
  Rng r(7);
  double s = 0, s2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.05);
  CHECK(std::abs(s2 / n - 1.0) < 0.05);
}

TEST_CASE("shuffle is a seeded permutation") {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  Rng a(3), b(3);
  a.shuffle(std::span<int>(v));
  b.shuffle(std::span<int>(w));
  CHECK(v == w);
  std::sort(v.begin(), v.end());
  for (int i = 0; i < 50; ++i) CHECK(v[static_cast<std::size_t>(i)] == i);
}
