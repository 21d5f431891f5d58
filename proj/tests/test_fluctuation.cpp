#include <doctest.h>

#include "perslab/error.hpp"
#include "perslab/fluctuation.hpp"
#include "perslab/rng.hpp"

#include <cmath>

using namespace perslab;

TEST_CASE("positivity probabilities of the simple walk") {
  const auto s = IncrementSpec::simple();
  const auto strict = positivity_probs(s, 6, PositivityMode::Strict);
  CHECK(strict.probs[1] == Rational(1, 2));
  CHECK(strict.probs[2] == Rational(1, 4));
  CHECK(strict.probs[3] == Rational(1, 2));
  const auto weak = positivity_probs(s, 2, PositivityMode::Weak);
  CHECK(weak.probs[2] == Rational(3, 4));
  const auto real = positivity_probs_real(s, 6);
  for (std::size_t n = 1; n <= 6; ++n) CHECK(real.probs[n] == doctest::Approx(to_double(strict.probs[n])));
}

TEST_CASE("geometric tails need no truncation") {
  // P(S_2 > 0) = P(1, 1) = 4/9; P(S_2 >= 0) adds (1, -1) and (-1, 1): 4/9 + 2 (2/3)(1/6) = 2/3.
  const auto g = IncrementSpec::geometric();
  CHECK(positivity_probs(g, 2).probs[2] == Rational(4, 9));
  CHECK(positivity_probs(g, 2, PositivityMode::Weak).probs[2] == Rational(2, 3));
}

TEST_CASE("Sparre-Andersen recursion") {
  const auto q = sparre_andersen(constant_positivity(Rational(1, 2), 50));
  for (std::size_t n = 0; n <= 50; ++n) CHECK(q[n] == symmetric_continuous_qn(n));
  CHECK(q[3] == Rational(5, 16));
  CHECK(symmetric_continuous_qn(1) == Rational(1, 2));
  CHECK(symmetric_continuous_qn(5) == Rational(63, 256));

  const auto qd = sparre_andersen(constant_positivity(0.5, 10000));
  CHECK(std::sqrt(10000.0) * qd[10000] == doctest::Approx(1.0 / std::sqrt(M_PI)).epsilon(0.01));

  CHECK(sparre_andersen(constant_positivity(Rational(1), 5))[5] == 1);
  CHECK(sparre_andersen(constant_positivity(Rational(0), 5))[5] == 0);
}

TEST_CASE("q_n of the simple walk: monotone and above the product bound") {
  const auto seq = positivity_probs(IncrementSpec::simple(), 40);
  const auto q = sparre_andersen(seq);
  Rational prod = 1;
  for (std::size_t n = 1; n <= 40; ++n) {
    prod *= seq.probs[n];
    CHECK(q[n] <= q[n - 1]);
    CHECK(q[n] >= prod);
  }
  // q_2 = P(S_1 > 0, S_2 > 0) = 1/4.
  CHECK(q[2] == Rational(1, 4));
}

TEST_CASE("series diagnostic") {
  const auto zero = series_diagnostic(constant_positivity(Rational(1, 2), 20), 2.0);
  for (double v : zero) CHECK(v == 0.0);

  PositivitySeq<double> seq;
  seq.probs.assign(2001, 0.0);
  for (std::size_t n = 1; n <= 2000; ++n) seq.probs[n] = 0.5 + 1.0 / double(n * n);
  const auto sums = series_diagnostic(seq, 2.0);
  for (std::size_t n = 33; n < sums.size(); ++n) CHECK(std::abs(sums.back() - sums[n - 1]) < 1e-3);

  const auto simple = series_diagnostic(positivity_probs(IncrementSpec::simple(), 200), 2.0);
  CHECK(simple.size() == 200);
}

TEST_CASE("half-plane measures") {
  SUBCASE("correlated coin, n = 1") {
    const auto t = halfplane_measures(bivariate_preset("correlated-coin"), 1);
    REQUIRE(t.rows.size() == 2);
    const auto& r = t.rows[1];
    CHECK(r.x == 1);
    CHECK(r.lhs1 == Rational(1, 2));
    CHECK(r.rhs1 == Rational(1, 4));
    CHECK(r.indep1_holds());
    CHECK(r.lhs2 == Rational(1, 2));
    CHECK(r.rhs2 == Rational(1, 4));
  }
  SUBCASE("independent coordinates factorize") {
    const auto b = bivariate_preset("independent-coins");
    for (std::size_t n = 1; n <= 6; ++n) {
      const auto t = halfplane_measures(b, n);
      for (const auto& r : t.rows) {
        const Rational px = r.rhs1 / t.min_strict;
        CHECK(r.lhs1 == px * t.min_weak);
        CHECK(r.lhs2 == px * t.min_strict);
      }
    }
  }
  SUBCASE("y-symmetric specs have no violations and marginalize") {
    for (const char* name : {"perfectly-correlated", "independent-coins", "asymmetric-x"}) {
      const auto b = bivariate_preset(name);
      CHECK(b.y_symmetric);
      for (std::size_t n = 1; n <= 5; ++n) {
        const auto t = halfplane_measures(b, n);
        CHECK(t.violations() == 0);
        Rational sum1 = 0, sum2 = 0;
        for (const auto& r : t.rows) {
          sum1 += r.lhs1;
          sum2 += r.lhs2;
        }
        CHECK(sum1 == t.min_weak);
        CHECK(sum2 == t.min_strict);
      }
    }
  }
  SUBCASE("parsing") {
    const auto b = parse_bivariate("mine", "1,1:1/4; 1,-1:1/4; -1,0:1/2");
    CHECK(b.y_symmetric);
    CHECK_THROWS_WITH_AS(parse_bivariate("bad", "1,1:1/2"), doctest::Contains("MassDeficit"), Error);
    CHECK_THROWS_WITH_AS(parse_bivariate("bad", "1;1:1"), doctest::Contains("ConfigError"), Error);
  }
  CHECK_THROWS_WITH_AS(halfplane_measures(bivariate_preset("asymmetric-x"), 40), doctest::Contains("TooLarge"), Error);
}

TEST_CASE("KS statistics") {
  SUBCASE("identical samples") {
    std::vector<double> a{1, 2, 2, 3, 5};
    const auto r = ks_two_sample(a, a);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == doctest::Approx(1.0));
  }
  SUBCASE("one-sample calibration: about 1% rejections at level 0.01") {
    int rejected = 0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
      RandomStream rng(17, 0, rep);
      std::vector<double> xs(2000);
      for (auto& x : xs) x = std::abs(rng.normal());
      const auto r = ks_one_sample(xs, [](double x) { return std::erf(x / std::sqrt(2.0)); });
      rejected += r.p_value < 0.01;
    }
    // Binomial(100, 0.01): P(X > 5) < 1e-3.
    CHECK(rejected <= 5);
  }
  SUBCASE("laplace positive part is Exp(1)") {
    const auto lap = IncrementSpec::laplace(1.0);
    std::vector<double> xs;
    RandomStream rng(23, 0, 0);
    while (xs.size() < 100000) {
      const double x = lap.sampler()(rng);
      if (x > 0) xs.push_back(x);
    }
    const auto r = ks_one_sample(xs, [](double x) { return 1.0 - std::exp(-x); });
    CHECK(r.p_value > 0.01);
  }
}

TEST_CASE("cycle-walk independence, small run") {
  McOptions mc;
  mc.seed = 5;
  const auto r = corollary_independence_check(IncrementSpec::laplace(), 1, 5000, mc, 1024);
  // At n = 1 the conditioned and free samples have the same law.
  CHECK(r.ks.p_value > 0.001);
  CHECK(r.accepted == 5000);
  CHECK(r.attempted >= r.accepted);
  CHECK_THROWS_WITH_AS(corollary_independence_check(IncrementSpec::simple(), 2, 10), doctest::Contains("InvalidParameter"),
                       Error);
  mc.shards = 3;
  const auto again = corollary_independence_check(IncrementSpec::laplace(), 1, 5000, mc, 1024);
  CHECK(again.ks.statistic == r.ks.statistic);
}
