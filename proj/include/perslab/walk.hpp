#pragma once

#include "perslab/increments.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace perslab {

enum class Conditioning {
  None,
  FirstPositive,  // the law P(. | S1 > 0), by rejection on the first step
};

/// How a trajectory is cut into cycles.
enum class CrossingConvention {
  WeakUp,        // S_n <= 0, S_{n+1} > 0 (default)
  StrictUp,      // S_n < 0, S_{n+1} >= 0
  LastNegative,  // S_n < 0 and the next non-zero value is positive
  LeaveZero,     // S_n = 0, S_{n+1} != 0
};

std::string_view convention_name(CrossingConvention c);
CrossingConvention parse_convention(std::string_view name);

/// Realized walk S_1..S_n with integrated sums A_k = S_1 + ... + S_k.
/// Entries are stored 0-based: s[k-1] = S_k.
struct Trajectory {
  std::vector<double> s;
  std::vector<double> a;

  std::size_t n() const { return s.size(); }
  /// Builds the trajectory whose walk has the given increments.
  static Trajectory from_increments(std::span<const double> steps);
  /// Builds the trajectory from the walk values S_1..S_n themselves.
  static Trajectory from_walk(std::span<const double> walk);
};

/// Plain-text dump: one row "k S_k A_k" per step.
void write_trajectory(std::ostream& os, const Trajectory& t);

/// Regeneration data of one trajectory. Cycle k (1-based) is stored at
/// index k-1 of the per-cycle vectors; theta_big and psi_big carry the
/// extra leading entry for k = 0.
struct CycleRecord {
  CrossingConvention convention = CrossingConvention::WeakUp;
  std::vector<std::size_t> theta_big;  // Theta_0, Theta_1, ...
  std::vector<double> psi_big;         // Psi_k = A_{Theta_k} (A_0 = 0)
  std::vector<std::size_t> theta;      // theta_k = Theta_k - Theta_{k-1}
  std::vector<double> psi;             // psi_k = Psi_k - Psi_{k-1}
  std::vector<std::size_t> theta_hat;  // last in-cycle index with S < 0, 0 if none
  std::vector<std::size_t> theta_plus;
  std::vector<std::size_t> theta_minus;
  std::size_t eta = 0;                 // complete cycles observed by t.n()

  std::size_t cycles() const { return theta.size(); }
};

/// Cuts a trajectory into cycles. A cut at time n needs S_{n+1}, so a
/// crossing at the final index is not observable; simulate N + 1 steps to
/// get eta(N) exactly. The part before Theta_0 is discarded.
CycleRecord decompose(const Trajectory& t, CrossingConvention convention = CrossingConvention::WeakUp);

/// eta(N) = max{k : Theta_k <= N} among the crossings recorded.
std::size_t cycles_up_to(const CycleRecord& rec, std::size_t horizon);

/// True iff A_k > 0 for every 1 <= k <= n.
bool persistence_indicator(const Trajectory& t, std::size_t n);

/// The regenerative form of the same event: A_1 > 0, A_n > 0, and
/// A_{Theta_k} > 0 for every weak up-crossing Theta_k <= n.
bool reduction_indicator(const Trajectory& t, std::size_t n);

template <class Stream>
double draw_first_step(const IncrementSpec& spec, Stream& rng, Conditioning conditioning) {
  const auto& sample = spec.sampler();
  double x = sample(rng);
  if (conditioning == Conditioning::FirstPositive)
    while (!(x > 0.0)) x = sample(rng);
  return x;
}

template <class Stream>
Trajectory simulate(const IncrementSpec& spec, std::size_t n, Stream& rng,
                    Conditioning conditioning = Conditioning::None) {
  Trajectory t;
  t.s.reserve(n);
  t.a.reserve(n);
  const auto& sample = spec.sampler();
  double s = 0.0, a = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    s += k == 0 ? draw_first_step(spec, rng, conditioning) : sample(rng);
    a += s;
    t.s.push_back(s);
    t.a.push_back(a);
  }
  return t;
}

/// One draw of the first cycle.
struct CycleDraw {
  std::size_t theta = 0;
  double psi = 0.0;
  std::size_t theta_hat = 0;
  std::size_t theta_plus = 0;
  bool censored = false;  // no cut within cap steps; theta = cap, psi = A_cap
};

/// Samples the first cycle under P(. | S1 > 0) (P(. | S1 != 0) for
/// LeaveZero), walking at most cap + 1 steps.
template <class Stream>
CycleDraw sample_cycle(const IncrementSpec& spec, Stream& rng, std::size_t cap,
                       CrossingConvention convention = CrossingConvention::WeakUp) {
  const auto& sample = spec.sampler();
  CycleDraw out;
  double s = sample(rng);
  if (convention == CrossingConvention::LeaveZero) {
    while (s == 0.0) s = sample(rng);
  } else {
    while (!(s > 0.0)) s = sample(rng);
  }
  double a = s;
  std::size_t last_neg = 0;  // last index with S < 0 so far
  double a_last_neg = 0.0;
  bool pending = false;      // LastNegative: only zeros since the last negative value
  std::size_t plus = 0;
  double a_cap = 0.0;
  for (std::size_t n = 1;; ++n) {
    // (s, a) = (S_n, A_n); a cut at n is decided by S_{n+1}.
    if (s < 0.0) {
      last_neg = n;
      a_last_neg = a;
    }
    if (n == cap) a_cap = a;
    const double next = s + sample(rng);
    if (plus == 0 && s >= 0.0 && next < 0.0) plus = n;
    bool cut = false;
    std::size_t at = n;
    double area = a;
    switch (convention) {
      case CrossingConvention::WeakUp: cut = s <= 0.0 && next > 0.0; break;
      case CrossingConvention::StrictUp: cut = s < 0.0 && next >= 0.0; break;
      case CrossingConvention::LeaveZero: cut = s == 0.0 && next != 0.0; break;
      case CrossingConvention::LastNegative: {
        const bool after_negative = s < 0.0 || pending;
        cut = after_negative && next > 0.0;
        pending = after_negative && next == 0.0;
        at = last_neg;
        area = a_last_neg;
        break;
      }
    }
    if (cut) {
      if (at > cap) break;
      out.theta = at;
      out.psi = area;
      out.theta_hat = last_neg;
      out.theta_plus = (plus == 0 || plus > at) ? at : plus;
      return out;
    }
    if (n >= cap && !(pending && last_neg <= cap)) break;
    s = next;
    a += s;
  }
  out.censored = true;
  out.theta = cap;
  out.psi = a_cap;
  out.theta_plus = (plus == 0 || plus > cap) ? cap : plus;
  return out;
}

}  // namespace perslab
