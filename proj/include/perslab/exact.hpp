#pragma once

#include "perslab/increments.hpp"
#include "perslab/rational.hpp"
#include "perslab/walk.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <utility>
#include <vector>

namespace perslab {

/// Finite map from lattice values (or value pairs) to exact masses.
/// Sub-probability laws are allowed.
template <class Key>
struct ExactDist {
  std::map<Key, Rational> atoms;

  Rational total() const {
    Rational t = 0;
    for (const auto& [k, q] : atoms) t += q;
    return t;
  }
  Rational mass(const Key& k) const {
    auto it = atoms.find(k);
    return it == atoms.end() ? Rational(0) : it->second;
  }
  void add(const Key& k, const Rational& q) {
    if (q != 0) atoms[k] += q;
  }
};

using LengthArea = std::pair<long, long>;
using ExactDist1 = ExactDist<long>;
using ExactDist2 = ExactDist<LengthArea>;

struct DpBudget {
  std::size_t max_states = 20'000'000;          // live states in one layer
  std::size_t max_transitions = 4'000'000'000;  // over the whole run
};

/// Snapshot of the DP frontier over (S_k, A_k) with the mass already decided.
struct StateLayer {
  std::size_t step = 0;
  std::map<std::pair<long, long>, Rational> mass;  // (S, A) -> mass
  Rational absorbed_success = 0;
  Rational absorbed_failure = 0;
  Rational pruned = 0;  // bridge mode: paths that can no longer end at 0

  Rational frontier_mass() const;
};

struct PersistenceDpOptions {
  /// Absorb states that stay positive whatever the remaining steps do
  /// (bounded negative support only).
  bool absorb_success = true;
  /// Drop states that cannot reach S = 0 by the horizon (bridge mode).
  bool bridge = false;
  DpBudget budget;
};

/// Forward dynamic program for P(A_1 > 0, ..., A_k > 0) on a rational
/// lattice law, one step at a time. Masses are big-integer numerators over
/// D^k, D the common denominator of the atoms that can matter by the horizon.
class PersistenceDp {
 public:
  PersistenceDp(const IncrementSpec& spec, std::size_t horizon, PersistenceDpOptions options = {});
  ~PersistenceDp();
  PersistenceDp(PersistenceDp&&) noexcept;
  PersistenceDp& operator=(PersistenceDp&&) noexcept;

  std::size_t step_index() const;
  bool done() const;
  /// Advances one step. Throws StateBudgetExceeded.
  void step();
  void run() {
    while (!done()) step();
  }

  /// Exact snapshot of the current layer (expensive; meant for checks).
  StateLayer layer() const;
  /// P(min_{k <= step} A_k > 0): success plus frontier.
  Rational survival() const;
  /// Mass of surviving paths with S = 0 at the current step.
  Rational survival_at_zero() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Exact p_n = P(min_{1<=k<=n} A_k > 0).
Rational exact_persistence(const IncrementSpec& spec, std::size_t n, DpBudget budget = {});

/// Floating-point DP: states lighter than `prune_below` are dropped into an
/// undecided bucket, giving a certified enclosure [lower, upper].
struct FloatPersistence {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};
FloatPersistence exact_persistence_float(const IncrementSpec& spec, std::size_t n,
                                         double prune_below = 0.0, DpBudget budget = {});

/// Exact P(S_n = 0), by convolution.
Rational exact_zero_probability(const IncrementSpec& spec, std::size_t n);

/// p*_n = P(min A_k > 0, S_n = 0) / P(S_n = 0). Throws NotInBridgeSet.
Rational exact_bridge_persistence(const IncrementSpec& spec, std::size_t n, DpBudget budget = {});

struct BridgePoint {
  std::size_t n = 0;
  Rational joint;      // P(min A_k > 0, S_n = 0)
  Rational zero_prob;  // P(S_n = 0)
  Rational value;      // joint / zero_prob
};
/// Bridge persistence for every n <= n_max in the bridge set, one forward pass.
std::vector<BridgePoint> bridge_series(const IncrementSpec& spec, std::size_t n_max, DpBudget budget = {});

/// Brute-force oracle: sum over surviving paths, one path at a time.
Rational enumerate_persistence(const IncrementSpec& spec, std::size_t n,
                               std::size_t max_paths = 100'000'000);

/// Brute-force P(. | S1 > 0){min_{k <= eta(n)} Psi_k > 0} over all paths of
/// n + 1 steps (weak up-crossings).
Rational enumerate_cycle_minimum(const IncrementSpec& spec, std::size_t n,
                                 std::size_t max_paths = 100'000'000);

/// First-cycle law restricted to theta_1 <= horizon.
struct CycleLaw {
  CrossingConvention convention = CrossingConvention::WeakUp;
  std::size_t horizon = 0;
  ExactDist2 pair_law;  // (theta_1, psi_1)
  ExactDist2 hat_law;   // (theta_hat_1, A_{theta_hat_1})
  Rational residual;    // mass of cycles longer than the horizon
};
CycleLaw exact_cycle_law(const IncrementSpec& spec, std::size_t horizon,
                         CrossingConvention convention = CrossingConvention::WeakUp,
                         DpBudget budget = {});

/// Law of theta_1 alone (no area dimension), in floating point; reaches
/// long horizons. LastNegative is not supported.
std::vector<double> cycle_length_law(const IncrementSpec& spec, std::size_t horizon,
                                     CrossingConvention convention);

struct SymmetryAudit {
  Rational max_abs_asymmetry = 0;
  std::optional<LengthArea> worst_atom;
};
/// max over atoms of |P(t, a) - P(t, -a)|.
SymmetryAudit symmetry_audit(const ExactDist2& law);

}  // namespace perslab
