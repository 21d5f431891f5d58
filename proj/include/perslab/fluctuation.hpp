#pragma once

#include "perslab/increments.hpp"
#include "perslab/parallel.hpp"
#include "perslab/rational.hpp"
#include "perslab/walk.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

namespace perslab {

enum class PositivityMode { Strict, Weak };

/// probs[n] = P(S_n > 0) (Strict) or P(S_n >= 0) (Weak) for n = 1..size-1;
/// probs[0] is unused and set to 1.
template <class T>
struct PositivitySeq {
  PositivityMode mode = PositivityMode::Strict;
  std::vector<T> probs;

  std::size_t n_max() const { return probs.empty() ? 0 : probs.size() - 1; }
};

/// Exact P(S_n > 0) (or >= 0) by iterated convolution. Values that can no
/// longer come back above zero by n_max are dropped, which is exact for
/// laws bounded above, so geometric tails need no truncation.
PositivitySeq<Rational> positivity_probs(const IncrementSpec& spec, std::size_t n_max,
                                         PositivityMode mode = PositivityMode::Strict,
                                         std::size_t max_states = 10'000'000);

/// Same in floating point; works for heavy tails.
PositivitySeq<double> positivity_probs_real(const IncrementSpec& spec, std::size_t n_max,
                                            PositivityMode mode = PositivityMode::Strict);

/// q_0 = 1, n q_n = sum_{k=1}^n probs[k] q_{n-k}.
template <class T>
std::vector<T> sparre_andersen(const PositivitySeq<T>& seq) {
  const std::size_t n_max = seq.n_max();
  std::vector<T> q(n_max + 1, T(0));
  q[0] = T(1);
  for (std::size_t n = 1; n <= n_max; ++n) {
    T acc(0);
    for (std::size_t k = 1; k <= n; ++k) acc += seq.probs[k] * q[n - k];
    q[n] = acc / T(static_cast<long>(n));
  }
  return q;
}

/// Constant sequence probs[n] = value, n = 1..n_max.
template <class T>
PositivitySeq<T> constant_positivity(const T& value, std::size_t n_max) {
  PositivitySeq<T> s;
  s.probs.assign(n_max + 1, value);
  s.probs[0] = T(1);
  return s;
}

/// C(2n, n) 4^-n.
Rational symmetric_continuous_qn(std::size_t n);

/// Partial sums sum_{k<=n} (probs[k] - 1/alpha) / k for n = 1..n_max
/// (entry n - 1 holds the n-th partial sum).
template <class T>
std::vector<double> series_diagnostic(const PositivitySeq<T>& seq, double alpha) {
  std::vector<double> out;
  double acc = 0.0;
  for (std::size_t k = 1; k <= seq.n_max(); ++k) {
    double p;
    if constexpr (std::is_same_v<T, double>) {
      p = seq.probs[k];
    } else {
      p = to_double(seq.probs[k]);
    }
    acc += (p - 1.0 / alpha) / static_cast<double>(k);
    out.push_back(acc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bivariate walks and half-plane inequalities
// ---------------------------------------------------------------------------

struct BivariateIncrementSpec {
  std::string id;
  std::map<std::pair<long, long>, Rational> pmf;  // (x, y) -> mass
  bool y_symmetric = false;
};

/// Validates (nonnegative, total 1) and sets y_symmetric.
BivariateIncrementSpec make_bivariate(std::string id, std::map<std::pair<long, long>, Rational> pmf);

/// Named specs: correlated-coin, perfectly-correlated, independent-coins,
/// asymmetric-x.
BivariateIncrementSpec bivariate_preset(std::string_view name);

/// Parses "x,y:mass; x,y:mass; ...".
BivariateIncrementSpec parse_bivariate(std::string id, std::string_view text);

struct HalfplaneRow {
  long x = 0;
  Rational lhs1;  // P(S_n^(1) = x, min_{i<=n} S_i^(2) >= 0)
  Rational rhs1;  // P(S_n^(1) = x) P(min S^(2) > 0)
  Rational lhs2;  // P(S_n^(1) = x, min S^(2) > 0)
  Rational rhs2;  // P(S_n^(1) = x) P(min S^(2) >= 0)

  bool indep1_holds() const { return lhs1 >= rhs1; }
  bool indep2_holds() const { return lhs2 <= rhs2; }
};

struct HalfplaneTable {
  std::size_t n = 0;
  std::vector<HalfplaneRow> rows;  // sorted by x
  Rational min_weak;               // P(min S^(2) >= 0)
  Rational min_strict;             // P(min S^(2) > 0)
  std::size_t paths = 0;

  std::size_t violations() const;
};

/// Exhaustive enumeration over all support^n paths. Throws TooLarge.
HalfplaneTable halfplane_measures(const BivariateIncrementSpec& bspec, std::size_t n,
                                  std::size_t max_paths = 100'000'000);

// ---------------------------------------------------------------------------
// Two-sample Kolmogorov-Smirnov
// ---------------------------------------------------------------------------

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

/// Two-sample KS with the asymptotic Kolmogorov p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One-sample KS against a continuous cdf.
template <class Cdf>
KsResult ks_one_sample(std::vector<double> a, Cdf&& cdf);

double ks_p_value(double statistic, double effective_n);

template <class Cdf>
KsResult ks_one_sample(std::vector<double> a, Cdf&& cdf) {
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, ks_p_value(d, n), a.size(), 0};
}

// ---------------------------------------------------------------------------
// Cycle-walk independence
// ---------------------------------------------------------------------------

struct CorollaryCheck {
  KsResult ks;
  std::size_t accepted = 0;   // cycle walks with min_{k<=n} Psi_k > 0
  std::size_t attempted = 0;  // cycle walks drawn for the conditioned sample
  std::size_t rejected_long_cycles = 0;
};

/// Draws cycle walks (Theta_k, Psi_k), k <= n, with cycles longer than `cap`
/// resampled, and compares Theta_n given min_{k<=n} Psi_k > 0 with an
/// independent unconditioned sample of the same size.
CorollaryCheck corollary_independence_check(const IncrementSpec& spec, std::size_t n, std::size_t samples,
                                            McOptions mc = {}, std::size_t cap = 4096);

/// Draws one cycle with theta <= cap under P(. | S1 > 0), resampling longer
/// ones; `rejected` counts the resampled cycles.
template <class Stream>
CycleDraw sample_short_cycle(const IncrementSpec& spec, Stream& rng, std::size_t cap, std::size_t& rejected) {
  for (;;) {
    CycleDraw c = sample_cycle(spec, rng, cap);
    if (!c.censored) return c;
    ++rejected;
  }
}

}  // namespace perslab
