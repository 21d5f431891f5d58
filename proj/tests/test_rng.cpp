#include <doctest.h>

#include "perslab/parallel.hpp"
#include "perslab/rng.hpp"

#include <cmath>
#include <set>
#include <vector>

using namespace perslab;

TEST_CASE("philox known-answer vectors") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are pure functions of (seed, job, index)") {
  RandomStream a(7, 3, 11), b(7, 3, 11), c(7, 3, 12), d(7, 4, 11), e(8, 3, 11);
  std::vector<std::uint64_t> xa, xb;
  for (int i = 0; i < 9; ++i) {
    xa.push_back(a());
    xb.push_back(b());
  }
  CHECK(xa == xb);
  const auto first = xa.front();
  CHECK(c() != first);
  CHECK(d() != first);
  CHECK(e() != first);
}

TEST_CASE("uniform stays inside (0, 1) and has the right mean") {
  RandomStream r(1, 0, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // sd of the mean is sqrt(1/12 / n)
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("map_indices does not depend on the shard count") {
  const auto f = [](std::size_t i) {
    RandomStream r(99, 1, i);
    return r.uniform();
  };
  const auto one = map_indices<double>(1000, 1, f);
  const auto four = map_indices<double>(1000, 4, f);
  CHECK(one == four);
}

TEST_CASE("for_each_index rethrows worker exceptions") {
  CHECK_THROWS_AS(for_each_index(10, 3,
                                 [](std::size_t i) {
                                   if (i == 7) throw std::runtime_error("boom");
                                 }),
                  std::runtime_error);
}
