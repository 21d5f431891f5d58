#pragma once

#include "perslab/error.hpp"
#include "perslab/rational.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace perslab {

// ---------------------------------------------------------------------------
// Increment families
// ---------------------------------------------------------------------------

/// P(S1 = +1) = P(S1 = -1) = 1/2.
struct SimpleWalk {};

/// P(S1 = 0) = stay_prob, P(S1 = +1) = P(S1 = -1) = (1 - stay_prob) / 2.
struct LazySimpleWalk {
  Rational stay_prob;
};

/// Law of the magnitude of a non-positive step, P(S1 = -k) for k >= 0.
///
/// A finite head table plus an optional geometric tail
/// P(S1 = -k) = coef * ratio^(k - first) for k >= first, kept in closed form
/// so that every atom is exact.
struct NegativePmf {
  struct GeometricTail {
    long first = 1;
    Rational coef;
    Rational ratio;
  };
  std::map<long, Rational> head;
  std::optional<GeometricTail> tail;
};

/// Skip-free walk: the only positive step is +1, taken with up_prob.
struct RightContinuousLattice {
  Rational up_prob;
  NegativePmf neg;
};

/// Negative part -X with X ~ Exp(rate).
struct NegExponential {
  double rate = 1.0;
};
/// Negative part is the single atom -value.
struct NegPoint {
  double value = 1.0;
};
using NegativeLaw = std::variant<NegExponential, NegPoint>;

/// Law(S1 | S1 > 0) = Exp(rate), P(S1 > 0) = pos_prob; the remaining mass
/// follows `neg`. Laplace(a) is pos_prob = 1/2 with NegExponential{a}.
struct RightExponential {
  double pos_prob = 0.5;
  double rate = 1.0;
  NegativeLaw neg = NegExponential{1.0};
};

/// Skip-free walk in the domain of normal attraction of a spectrally
/// negative alpha-stable law: P(S1 = 1) = p, P(S1 = -k) = c k^(-alpha-1)
/// for k >= k0, with (p, c) fixed by total mass 1 and mean 0.
struct HeavyTailRightContinuous {
  double alpha = 1.5;
  long k0 = 1;
};

using Family = std::variant<SimpleWalk, LazySimpleWalk, RightContinuousLattice,
                            RightExponential, HeavyTailRightContinuous>;

/// Lattice structure: S1 lives on d (shift + h Z) with d, h maximal.
struct LatticeInfo {
  long span = 1;     // d
  long subspan = 1;  // h
  long shift = 0;    // a, 0 <= a < h
};

struct ValidationReport {
  bool centered = false;
  bool unit_mass = false;
  bool right_continuous = false;
  bool right_exponential = false;
  std::optional<LatticeInfo> lattice;
  std::string mean;  // exact ("0/1") or closed-form text
  std::string mass;
};

struct Moments {
  double mean = 0.0;
  std::optional<double> variance;  // empty when alpha < 2
  double e_abs = 0.0;
  double pos_prob = 0.0;
};

/// Moments of a rational lattice law, exactly.
struct ExactMoments {
  Rational mean;
  Rational variance;
  Rational e_abs;
  Rational pos_prob;
};

/// Checks membership conditions and computes lattice facts. Throws
/// NonCentered, MassDeficit, NegativeProbability or InvalidParameter.
ValidationReport validate(const Family& family);

class IncrementSampler;

/// A validated, immutable increment law with its derived characteristics.
class IncrementSpec {
 public:
  explicit IncrementSpec(Family family);

  static IncrementSpec simple();
  static IncrementSpec lazy(Rational stay_prob);
  /// p = 2/3 up, P(S1 = -k) = (1/3) 2^(-k) for k >= 1.
  static IncrementSpec geometric();
  static IncrementSpec laplace(double rate = 1.0);
  static IncrementSpec heavy_tail(double alpha, long k0 = 1);

  const Family& family() const { return family_; }
  std::string_view family_name() const;
  /// Short identifier for CSV rows, e.g. "simple", "lazy(1/2)", "laplace(1)".
  std::string id() const;

  double alpha() const { return alpha_; }
  std::optional<double> sigma2() const { return moments_.variance; }
  double e_abs() const { return moments_.e_abs; }
  double pos_prob() const { return moments_.pos_prob; }
  const std::optional<LatticeInfo>& lattice() const { return report_.lattice; }
  const ValidationReport& report() const { return report_; }

  bool is_lattice() const { return report_.lattice.has_value(); }
  bool is_right_continuous() const { return report_.right_continuous; }
  bool is_right_exponential() const { return report_.right_exponential; }
  /// Lattice law whose atoms are all rational (everything but heavy tails).
  bool has_rational_pmf() const;
  bool has_finite_support() const;

  /// Largest positive atom (1 for every lattice family here).
  long max_up() const;
  /// Largest magnitude of a negative atom; empty when unbounded.
  std::optional<long> max_down() const;

  /// Exact P(S1 = k). Throws NotLattice / NotRational.
  Rational pmf(long k) const;
  /// P(S1 = k) in floating point; works for heavy tails too.
  double pmf_real(long k) const;
  /// Exact P(S1 <= k).
  Rational cdf(long k) const;
  /// Exact atoms with positive mass in [lo, hi] (finite range).
  std::vector<std::pair<long, Rational>> atoms(long lo, long hi) const;

  /// Heavy-tail normalization (p, c); throws for other families.
  std::pair<double, double> heavy_tail_constants() const;

  const IncrementSampler& sampler() const { return *sampler_; }

 private:
  Family family_;
  ValidationReport report_;
  Moments moments_;
  double alpha_ = 2.0;
  double heavy_p_ = 0.0;
  double heavy_c_ = 0.0;
  std::shared_ptr<const IncrementSampler> sampler_;

  friend Moments moments(const IncrementSpec& spec);
};

/// Moment bundle; `variance` is empty for alpha < 2.
Moments moments(const IncrementSpec& spec);
/// Variance, throwing VarianceUndefined when alpha < 2.
double variance(const IncrementSpec& spec);
/// Exact moments of a rational lattice law. Throws NotRational otherwise.
ExactMoments exact_moments(const IncrementSpec& spec);

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Precomputed inverse-CDF sampler. Stateless and shareable; the caller
/// supplies the random stream (anything with `double uniform()` on (0,1)).
class IncrementSampler {
 public:
  explicit IncrementSampler(const IncrementSpec& spec);

  template <class Stream>
  double operator()(Stream& rng) const {
    switch (kind_) {
      case Kind::Simple:
        return rng.uniform() < 0.5 ? -1.0 : 1.0;
      case Kind::Lazy: {
        const double u = rng.uniform();
        if (u < stay_) return 0.0;
        return u < stay_ + 0.5 * (1.0 - stay_) ? -1.0 : 1.0;
      }
      case Kind::RightExponential: {
        if (rng.uniform() < up_) return -std::log(rng.uniform()) / rate_;
        if (neg_point_) return -neg_value_;
        return std::log(rng.uniform()) / neg_value_;
      }
      case Kind::Lattice:
      default: {
        if (rng.uniform() < up_) return 1.0;
        const long k = negative_magnitude(rng.uniform());
        return k == 0 ? 0.0 : -static_cast<double>(k);
      }
    }
  }

  /// Magnitude k >= 0 of a non-positive lattice step given uniform v.
  long negative_magnitude(double v) const;

 private:
  enum class Kind { Simple, Lazy, RightExponential, Lattice };
  Kind kind_;
  double stay_ = 0.0;
  double up_ = 0.0;
  double rate_ = 1.0;
  bool neg_point_ = false;
  double neg_value_ = 1.0;

  // Lattice negative part: cdf over magnitudes head_first.. with a guide table.
  long head_first_ = 0;
  std::vector<double> head_cdf_;
  std::vector<std::uint32_t> guide_;
  double head_mass_ = 1.0;  // conditional mass of the tabulated part
  // Geometric tail (right-continuous lattice).
  bool geometric_tail_ = false;
  long tail_first_ = 0;
  double log_ratio_ = 0.0;
  // Power tail (heavy-tail family).
  bool power_tail_ = false;
  double alpha_ = 2.0;
  long double zeta_k0_ = 1.0L;  // zeta(alpha + 1, k0)

  long power_tail_magnitude(double v) const;
};

// ---------------------------------------------------------------------------
// Serialization: key = value lines, rationals as "num/den".
// ---------------------------------------------------------------------------

std::string serialize(const IncrementSpec& spec);
IncrementSpec parse_spec(std::string_view text);

/// Named presets: simple, lazy[:s], geometric, laplace[:a], heavy[:alpha].
IncrementSpec preset(std::string_view name);

}  // namespace perslab
