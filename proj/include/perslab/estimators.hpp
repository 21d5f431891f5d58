#pragma once

#include "perslab/fluctuation.hpp"
#include "perslab/increments.hpp"
#include "perslab/parallel.hpp"
#include "perslab/walk.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace perslab {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;

  /// Indicator mean: stderr = sqrt(v (1 - v) / n).
  static Estimate from_count(std::size_t hits, std::size_t n);
  static Estimate from_value(double value, double std_error, std::size_t n);
  /// Sample mean with the unbiased sample variance.
  static Estimate from_samples(const std::vector<double>& xs);
};

struct GridPoint {
  double n = 0.0;
  Estimate estimate;
};

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_lo = 0.0;
  double slope_hi = 0.0;
  double slope_se = 0.0;
  double r2 = 0.0;
  double chi2_per_dof = 0.0;  // weighted fits only
  bool weighted = false;
  std::vector<GridPoint> points;
};

/// Least squares of log p on log N. Weights (p / stderr)^2 when every point
/// carries an error; exact points give an unweighted fit with a Student-t
/// interval. The weighted interval is widened by sqrt(chi2 / dof) when the
/// scatter exceeds the error bars. Throws DegenerateGrid.
ExponentFit fit_exponent(const std::vector<GridPoint>& points);

/// Target slope -(1/2 - 1/(2 alpha)).
double theoretical_slope(double alpha);

/// Weighted mean of p_N N^(1/2 - 1/(2 alpha)) over the largest half of the
/// grid. Throws ExponentMismatch when the fitted slope interval misses the
/// target.
Estimate estimate_constant(const std::vector<GridPoint>& points, double alpha);

struct ReferenceConstants {
  double c1 = 0.0;                 // 1/sqrt(pi)
  std::optional<double> c2;        // sqrt(8/pi) sigma / E|S1|
  std::optional<std::pair<double, double>> eqc_interval;
};
ReferenceConstants reference_constants(const IncrementSpec& spec);

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

/// P(min_{k<=n} A_k > 0); each path stops at its first A_k <= 0.
Estimate mc_persistence(const IncrementSpec& spec, std::size_t n, std::size_t samples, McOptions mc = {});

/// mc_persistence at every grid point, each with its own job id.
std::vector<GridPoint> mc_persistence_grid(const IncrementSpec& spec, const std::vector<std::size_t>& grid,
                                           std::size_t samples, McOptions mc = {});

struct TailPoint {
  std::size_t n = 0;
  Estimate tail;                 // P(theta_1 >= n), censored draws counted as >= n
  double tail_lo = 0.0;          // censored draws counted as < n
  double tail_hi = 0.0;          // censored draws counted as >= n
  Estimate scaled;               // n^(1 - 1/alpha) P(theta_1 >= n)
  double scaled_lo = 0.0;
  double scaled_hi = 0.0;
};

struct CycleTail {
  std::vector<TailPoint> points;
  std::size_t samples = 0;
  std::size_t censored = 0;
  std::size_t cap = 0;
  std::optional<ExponentFit> log_slope;  // log P(theta >= n) on log n, >= 4 points
};

/// One shared sample of first cycles under P(. | S1 > 0), walked at most cap
/// steps each.
CycleTail mc_cycle_tail(const IncrementSpec& spec, const std::vector<std::size_t>& n_grid, std::size_t samples,
                        std::size_t cap, McOptions mc = {});

struct EtaScaling {
  std::size_t n = 0;
  double exponent = 0.5;       // eta(N) is scaled by N^exponent
  std::vector<double> scaled;  // eta(N) / N^(1 - 1/alpha), in sample order
  bool jittered = false;       // (eta + U) in place of eta
  bool reference = false;      // false: no reference law for this spec
  double reference_scale = 0.0;
  std::optional<KsResult> ks;
};

/// eta(N) under P(. | S1 > 0). For right-exponential laws with finite
/// variance the sample is compared with c2^-1 sqrt(2/pi) |Normal(0,1)|.
/// With `jitter`, an independent U(0,1) is added to each count before
/// scaling (continuity correction for the integer-valued eta).
EtaScaling mc_eta_scaling(const IncrementSpec& spec, std::size_t n, std::size_t samples, McOptions mc = {},
                          bool jitter = true);

struct KeyIdentity {
  Estimate lhs;
  Estimate rhs;
  double z = 0.0;
  std::vector<double> eta_distribution;  // P(eta(N) = k), from run A
  std::vector<Estimate> cycle_minimum;   // P(min_{j<=k} Psi_j > 0), from run B
  std::size_t rejected_long_cycles = 0;
};

/// LHS P(. | S1 > 0){min_{k<=eta(N)} Psi_k > 0} directly; RHS as
/// sum_k P(eta(N) = k) P(min_{j<=k} Psi_j > 0) from two further independent
/// runs (walks for eta, cycle walks for the minimum).
KeyIdentity check_key_identity(const IncrementSpec& spec, std::size_t n, std::size_t samples_lhs,
                               std::size_t samples_eta, std::size_t samples_cycles, McOptions mc = {},
                               std::size_t cap = 4096);

/// P(S_n > 0) by simulation.
Estimate positivity_limit_check(const IncrementSpec& spec, std::size_t n, std::size_t samples, McOptions mc = {});

struct PsiSymmetry {
  KsResult ks;
  std::size_t rejected_long_cycles = 0;
};

/// Two-sample KS between psi_1 and -psi_1' from independent first cycles
/// (cycles longer than `cap` resampled in both samples).
PsiSymmetry psi_symmetry_check(const IncrementSpec& spec, std::size_t samples, McOptions mc = {},
                               std::size_t cap = 4096);

struct Sandwich {
  Estimate ratio;     // P(. | S1 > 0){min_{k<=N} A_k > 0} = p_N / P(S1 > 0)
  Estimate upper;     // P~{min_{k<=eta(N)} Psi_k > 0}
  Estimate lower;     // P~{min_{k<=eta(N)+1} Psi_k > 0}, unfinished cycles counted as failures
  double lower_hi = 0.0;  // same, unfinished cycles counted as successes
  std::size_t unfinished = 0;

  /// ratio within [upper/2 - 3 se, upper + 3 se].
  bool halved_form_holds() const;
  /// ratio within [lower - 3 se, upper + 3 se].
  bool shifted_form_holds() const;
};

/// Both bounding forms of the last-cycle sandwich from the same walks;
/// the cycle straddling N is followed for at most `extra` further steps.
Sandwich sandwich_check(const IncrementSpec& spec, std::size_t n, std::size_t samples, McOptions mc = {},
                        std::size_t extra = 0);

}  // namespace perslab
