#include <doctest.h>

#include "perslab/error.hpp"
#include "perslab/estimators.hpp"
#include "perslab/exact.hpp"

#include <cmath>

using namespace perslab;

namespace {

std::vector<GridPoint> synthetic(double c, double slope, std::vector<double> ns) {
  std::vector<GridPoint> pts;
  for (double n : ns) pts.push_back({n, Estimate::from_value(c * std::pow(n, slope), 0.0, 0)});
  return pts;
}

McOptions seeded(std::uint64_t seed, unsigned shards = 1) {
  McOptions mc;
  mc.seed = seed;
  mc.shards = shards;
  return mc;
}

bool within(const Estimate& e, double target, double k = 3.0) { return std::abs(e.value - target) < k * e.std_error; }

}  // namespace

TEST_CASE("Estimate") {
  const auto e = Estimate::from_count(30, 100);
  CHECK(e.value == doctest::Approx(0.3));
  CHECK(e.std_error == doctest::Approx(std::sqrt(0.3 * 0.7 / 100)));
  CHECK(e.ci_lo == doctest::Approx(0.3 - 1.96 * e.std_error).epsilon(1e-4));
  CHECK(e.ci_hi == doctest::Approx(0.3 + 1.96 * e.std_error).epsilon(1e-4));
  const auto s = Estimate::from_samples({1, 2, 3, 4});
  CHECK(s.value == doctest::Approx(2.5));
  CHECK(s.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}

TEST_CASE("exponent fits on synthetic grids") {
  const std::vector<double> grid{16, 32, 64, 128, 256, 512};
  const auto f = fit_exponent(synthetic(1.0, -0.25, grid));
  CHECK(f.slope == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(fit_exponent(synthetic(0.8, -1.0 / 6.0, grid)).slope == doctest::Approx(-1.0 / 6.0).epsilon(1e-12));
  CHECK(fit_exponent(synthetic(0.8, -1.0 / 6.0, grid)).intercept == doctest::Approx(std::log(0.8)).epsilon(1e-12));

  const auto c = estimate_constant(synthetic(0.6, -0.25, grid), 2.0);
  CHECK(c.value == doctest::Approx(0.6).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(estimate_constant(synthetic(0.6, -0.4, grid), 2.0), doctest::Contains("ExponentMismatch"), Error);
  CHECK_THROWS_WITH_AS(fit_exponent(synthetic(1, -0.25, {1, 2, 3})), doctest::Contains("DegenerateGrid"), Error);
  CHECK_THROWS_WITH_AS(fit_exponent(synthetic(1, -0.25, {1, 2, 2, 3})), doctest::Contains("DegenerateGrid"), Error);
  CHECK(theoretical_slope(2.0) == doctest::Approx(-0.25));
  CHECK(theoretical_slope(1.5) == doctest::Approx(-1.0 / 6.0));
}

TEST_CASE("weighted fit recovers a noisy power law") {
  std::vector<GridPoint> pts;
  const double dev[] = {0.5, -1.0, 0.3, 0.8, -0.4, 0.1};
  int i = 0;
  for (double n : {64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0}) {
    const double p = std::pow(n, -0.25), se = 0.002 * p;
    pts.push_back({n, Estimate::from_value(p + dev[i++] * se, se, 1000000)});
  }
  const auto f = fit_exponent(pts);
  CHECK(f.weighted);
  CHECK(f.slope_lo < -0.25);
  CHECK(f.slope_hi > -0.25);
}

TEST_CASE("reference constants of Laplace(1)") {
  const auto r = reference_constants(IncrementSpec::laplace(1.0));
  CHECK(r.c1 == doctest::Approx(0.5641895835));
  REQUIRE(r.c2);
  CHECK(*r.c2 == doctest::Approx(2.2567583342));
  REQUIRE(r.eqc_interval);
  CHECK(r.eqc_interval->first == doctest::Approx(0.408).epsilon(1e-3));
  CHECK(r.eqc_interval->second == doctest::Approx(0.816).epsilon(1e-3));
  CHECK_FALSE(reference_constants(IncrementSpec::heavy_tail(1.5)).c2);
}

TEST_CASE("mc_persistence against exact values") {
  CHECK(within(mc_persistence(IncrementSpec::simple(), 3, 100000, seeded(1)), 0.375));
  CHECK(within(mc_persistence(IncrementSpec::laplace(), 1, 100000, seeded(1)), 0.5));
  CHECK(within(mc_persistence(IncrementSpec::simple(), 8, 100000, seeded(1)),
               to_double(exact_persistence(IncrementSpec::simple(), 8))));
}

TEST_CASE("calibration: 3-sigma agreement in at least 99 of 100 seeds") {
  for (const auto& spec : {IncrementSpec::simple(), IncrementSpec::geometric()}) {
    const double exact = to_double(exact_persistence(spec, 12));
    int ok = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) ok += within(mc_persistence(spec, 12, 4000, seeded(seed)), exact);
    CAPTURE(spec.id());
    CHECK(ok >= 99);
  }
}

TEST_CASE("results do not depend on the shard count") {
  const auto a = mc_persistence(IncrementSpec::laplace(), 64, 20000, seeded(3, 1));
  const auto b = mc_persistence(IncrementSpec::laplace(), 64, 20000, seeded(3, 4));
  CHECK(a.value == b.value);
  const auto t1 = mc_cycle_tail(IncrementSpec::laplace(), {4, 16, 64, 256}, 20000, 512, seeded(3, 1));
  const auto t4 = mc_cycle_tail(IncrementSpec::laplace(), {4, 16, 64, 256}, 20000, 512, seeded(3, 4));
  for (std::size_t i = 0; i < t1.points.size(); ++i) CHECK(t1.points[i].tail.value == t4.points[i].tail.value);
}

TEST_CASE("cycle tail of the simple walk decays like n^-1/2") {
  const auto t = mc_cycle_tail(IncrementSpec::simple(), {16, 32, 64, 128, 256, 512}, 200000, 4096, seeded(2));
  REQUIRE(t.log_slope);
  CHECK(std::abs(t.log_slope->slope + 0.5) < 0.05);
  for (const auto& p : t.points) {
    CHECK(p.tail_lo <= p.tail.value);
    CHECK(p.tail.value <= p.tail_hi);
  }
}

TEST_CASE("cycle tail: censored draws widen the interval") {
  const auto t = mc_cycle_tail(IncrementSpec::laplace(), {64, 128}, 20000, 64, seeded(4));
  CHECK(t.censored > 0);
  const auto& p = t.points.back();
  CHECK(p.tail_lo < p.tail_hi);
}

TEST_CASE("eta scaling") {
  const auto lap = mc_eta_scaling(IncrementSpec::laplace(), 1024, 3000, seeded(6));
  CHECK(lap.reference);
  CHECK(lap.reference_scale == doctest::Approx(std::sqrt(2.0 / M_PI) / 2.2567583342));
  REQUIRE(lap.ks);
  CHECK(lap.ks->p_value > 0.001);
  const auto heavy = mc_eta_scaling(IncrementSpec::heavy_tail(1.5), 256, 200, seeded(6));
  CHECK_FALSE(heavy.reference);
  CHECK_FALSE(heavy.ks);
  CHECK(heavy.scaled.size() == 200);
  CHECK(heavy.exponent == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("key identity") {
  SUBCASE("eta(1) = 0: both sides are 1") {
    const auto k = check_key_identity(IncrementSpec::laplace(), 1, 1000, 1000, 1000, seeded(7));
    CHECK(k.lhs.value == 1.0);
    CHECK(k.rhs.value == doctest::Approx(1.0));
    CHECK(k.z == 0.0);
  }
  SUBCASE("small run") {
    const auto k = check_key_identity(IncrementSpec::laplace(), 64, 20000, 20000, 20000, seeded(7));
    CHECK(std::abs(k.z) < 3.5);
    REQUIRE(k.cycle_minimum.size() > 5);
    CHECK(within(k.cycle_minimum[5], 63.0 / 256.0, 3.5));
  }
}

TEST_CASE("positivity") {
  const auto heavy = IncrementSpec::heavy_tail(1.5);
  CHECK(within(positivity_limit_check(heavy, 1, 20000, seeded(8)), heavy.pos_prob()));
  CHECK(within(positivity_limit_check(IncrementSpec::laplace(), 1000, 20000, seeded(8)), 0.5));
}

TEST_CASE("sandwich, small run") {
  const auto s = sandwich_check(IncrementSpec::laplace(), 128, 20000, seeded(9));
  CHECK(s.halved_form_holds());
  CHECK(s.shifted_form_holds());
  CHECK(s.lower.value <= s.upper.value);
}

TEST_CASE("psi symmetry of a right-exponential law") {
  const auto r = psi_symmetry_check(IncrementSpec::laplace(), 20000, seeded(10), 1024);
  CHECK(r.ks.p_value > 0.001);
  CHECK(r.ks.n1 == 20000);
  CHECK_THROWS_WITH_AS(psi_symmetry_check(IncrementSpec::simple(), 10), doctest::Contains("InvalidParameter"), Error);
}
