#include <doctest.h>

#include "perslab/error.hpp"
#include "perslab/increments.hpp"
#include "perslab/rng.hpp"

#include <cmath>
#include <map>

using namespace perslab;

namespace {

IncrementSpec rc(Rational up, std::map<long, Rational> head) {
  RightContinuousLattice f;
  f.up_prob = up;
  f.neg.head = std::move(head);
  return IncrementSpec(Family{f});
}

// Exact sum and first moment over a window wide enough for the families
// with a geometric tail to leave a remainder we can bound.
std::pair<Rational, Rational> window_moments(const IncrementSpec& s, long lo, long hi) {
  Rational mass = 0, mean = 0;
  for (const auto& [k, q] : s.atoms(lo, hi)) {
    mass += q;
    mean += q * k;
  }
  return {mass, mean};
}

}  // namespace

TEST_CASE("validation of the lattice presets") {
  const auto s = IncrementSpec::simple();
  REQUIRE(s.lattice());
  CHECK(s.lattice()->span == 1);
  CHECK(s.lattice()->subspan == 2);
  CHECK(s.lattice()->shift == 1);
  CHECK(s.is_right_continuous());

  const auto same = rc(Rational(1, 2), {{1, Rational(1, 2)}});
  CHECK(same.report().centered);
  CHECK(same.lattice()->subspan == 2);
  for (long k = -3; k <= 3; ++k) CHECK(same.pmf(k) == s.pmf(k));

  const auto g = IncrementSpec::geometric();
  CHECK(g.report().centered);
  CHECK(g.report().unit_mass);
  CHECK_FALSE(g.max_down().has_value());
}

TEST_CASE("rejected specs") {
  CHECK_THROWS_WITH_AS(rc(Rational(1, 3), {{1, Rational(2, 3)}}), doctest::Contains("NonCentered"), Error);
  CHECK_THROWS_WITH_AS(rc(Rational(1, 2), {{1, Rational(1, 4)}}), doctest::Contains("MassDeficit"), Error);
  CHECK_THROWS_WITH_AS(rc(Rational(1, 2), {{1, Rational(1, 4)}, {2, Rational(1, 2)}, {3, Rational(-1, 4)}}),
                       doctest::Contains("NegativeProbability"), Error);
}

TEST_CASE("pmf values") {
  const auto s = IncrementSpec::simple();
  CHECK(s.pmf(1) == Rational(1, 2));
  CHECK(s.pmf(0) == 0);
  CHECK(s.pmf(5) == 0);
  const auto g = IncrementSpec::geometric();
  CHECK(g.pmf(-2) == Rational(1, 12));
  CHECK(g.pmf(1) == Rational(2, 3));
  CHECK(g.cdf(-3) == Rational(1, 12));
  CHECK_THROWS_WITH_AS(IncrementSpec::laplace().pmf(0), doctest::Contains("NotLattice"), Error);
  CHECK_THROWS_WITH_AS(IncrementSpec::heavy_tail(1.5).pmf(-1), doctest::Contains("NotRational"), Error);
}

TEST_CASE("exact centering and mass") {
  for (const auto& s : {IncrementSpec::simple(), IncrementSpec::lazy(Rational(1, 2)), IncrementSpec::lazy(Rational(1, 5))}) {
    const auto [mass, mean] = window_moments(s, -5, 5);
    CHECK(mass == 1);
    CHECK(mean == 0);
  }
  // Geometric tail: the window [-40, 1] misses mass 2^-40 / 3 and first moment 42 * 2^-40 / 3.
  const auto [mass, mean] = window_moments(IncrementSpec::geometric(), -40, 1);
  Rational tail(1, 3);
  tail /= Rational(BigInt(1) << 40);
  CHECK(mass + tail == 1);
  CHECK(mean - 42 * tail == 0);
}

TEST_CASE("moments") {
  const auto m = moments(IncrementSpec::simple());
  CHECK(m.mean == 0.0);
  CHECK(*m.variance == doctest::Approx(1.0));
  CHECK(m.e_abs == doctest::Approx(1.0));
  CHECK(m.pos_prob == doctest::Approx(0.5));

  const auto l = moments(IncrementSpec::laplace(1.0));
  CHECK(l.mean == doctest::Approx(0.0));
  CHECK(*l.variance == doctest::Approx(2.0));
  CHECK(l.e_abs == doctest::Approx(1.0));
  CHECK(l.pos_prob == doctest::Approx(0.5));

  // p = zeta(3/2) c and c = 1 / (zeta(5/2) + zeta(3/2)).
  const auto h = IncrementSpec::heavy_tail(1.5);
  CHECK_THROWS_WITH_AS(variance(h), doctest::Contains("VarianceUndefined"), Error);
  const auto [p, c] = h.heavy_tail_constants();
  CHECK(c == doctest::Approx(0.25291723554040058).epsilon(1e-12));
  CHECK(p == doctest::Approx(0.66071475138342384).epsilon(1e-12));
  CHECK(h.pos_prob() == doctest::Approx(p).epsilon(1e-12));
  // Direct summation of the pmf.
  double mass = h.pmf_real(1), mean = h.pmf_real(1);
  for (long k = 1; k <= 2'000'000; ++k) {
    mass += h.pmf_real(-k);
    mean -= static_cast<double>(k) * h.pmf_real(-k);
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  // Missing first-moment tail beyond K is about c K^-1/2 / (1/2) ~ 3.6e-4.
  CHECK(std::abs(mean) < 4e-4);
}

TEST_CASE("serialization round trip") {
  for (const char* name : {"simple", "lazy:1/3", "geometric", "laplace:2", "heavy:1.5:2"}) {
    const auto s = preset(name);
    const auto text = serialize(s);
    const auto back = parse_spec(text);
    CHECK(serialize(back) == text);
    CHECK(back.id() == s.id());
  }
  CHECK_THROWS_WITH_AS(parse_spec("family = simple\nbogus = 1\n"), doctest::Contains("ConfigError"), Error);
  CHECK_THROWS_WITH_AS(preset("cauchy"), doctest::Contains("ConfigError"), Error);
}

TEST_CASE("sampling") {
  RandomStream rng(5, 0, 0);
  SUBCASE("simple walk draws are +-1") {
    const auto s = IncrementSpec::simple();
    for (int i = 0; i < 1000; ++i) {
      const double x = s.sampler()(rng);
      CHECK((x == 1.0 || x == -1.0));
    }
  }
  SUBCASE("laplace mean, 1e6 draws") {
    const auto s = IncrementSpec::laplace(1.0);
    double sum = 0.0;
    for (int i = 0; i < 1'000'000; ++i) sum += s.sampler()(rng);
    CHECK(std::abs(sum / 1e6) < 4.3e-3);  // 3 sqrt(2) / 1000
  }
  SUBCASE("heavy tail: positive draws are exactly 1, frequency matches pos_prob") {
    const auto s = IncrementSpec::heavy_tail(1.5);
    const int n = 200000;
    int ones = 0;
    for (int i = 0; i < n; ++i) {
      const double x = s.sampler()(rng);
      if (x > 0) {
        REQUIRE(x == 1.0);
        ++ones;
      }
      REQUIRE(x == std::floor(x));
    }
    const double p = s.pos_prob();
    CHECK(std::abs(ones / double(n) - p) < 3.0 * std::sqrt(p * (1 - p) / n));
  }
  SUBCASE("geometric empirical pmf within 3 sigma on atoms of mass >= 1e-3") {
    const auto s = IncrementSpec::geometric();
    const int n = 1'000'000;
    std::map<long, int> counts;
    for (int i = 0; i < n; ++i) ++counts[static_cast<long>(s.sampler()(rng))];
    for (long k = -9; k <= 1; ++k) {
      const double p = to_double(s.pmf(k));
      if (p < 1e-3) continue;
      CHECK(std::abs(counts[k] / double(n) - p) < 3.0 * std::sqrt(p * (1 - p) / n));
    }
  }
}
