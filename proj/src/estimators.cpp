#include "perslab/estimators.hpp"

#include "perslab/rng.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace perslab {

namespace {

constexpr double kZ95 = 1.959963984540054;

enum JobKind : std::uint64_t {
  kPersistence = 1,
  kCycleTail,
  kEta,
  kKeyLhs,
  kKeyEta,
  kKeyCycles,
  kPositivity,
  kSandwich,
  kPsiSymmetry,
};

}  // namespace

Estimate Estimate::from_value(double value, double std_error, std::size_t n) {
  return {value, std_error, n, value - kZ95 * std_error, value + kZ95 * std_error};
}

Estimate Estimate::from_count(std::size_t hits, std::size_t n) {
  if (n == 0) return {};
  const double v = static_cast<double>(hits) / static_cast<double>(n);
  return from_value(v, std::sqrt(v * (1.0 - v) / static_cast<double>(n)), n);
}

Estimate Estimate::from_samples(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n == 0) return {};
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
  return from_value(mean, std::sqrt(var / static_cast<double>(n)), n);
}

// ---------------------------------------------------------------------------
// Fits
// ---------------------------------------------------------------------------

ExponentFit fit_exponent(const std::vector<GridPoint>& points) {
  if (points.size() < 4) throw Error(ErrorCode::DegenerateGrid, "need at least 4 grid points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].n > 0.0) || !(points[i].estimate.value > 0.0))
      throw Error(ErrorCode::DegenerateGrid, "grid values must be positive");
    if (i > 0 && !(points[i].n > points[i - 1].n))
      throw Error(ErrorCode::DegenerateGrid, "grid must be strictly increasing");
  }
  const bool weighted =
      std::all_of(points.begin(), points.end(), [](const GridPoint& p) { return p.estimate.std_error > 0.0; });
  const std::size_t k = points.size();
  std::vector<double> x(k), y(k), w(k);
  for (std::size_t i = 0; i < k; ++i) {
    x[i] = std::log(points[i].n);
    y[i] = std::log(points[i].estimate.value);
    const double rel = points[i].estimate.std_error / points[i].estimate.value;
    w[i] = weighted ? 1.0 / (rel * rel) : 1.0;
  }
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
    syy += w[i] * (y[i] - my) * (y[i] - my);
  }
  ExponentFit f;
  f.points = points;
  f.weighted = weighted;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ss_res += w[i] * r * r;
  }
  f.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  const double dof = static_cast<double>(k - 2);
  double half;
  if (weighted) {
    f.chi2_per_dof = ss_res / dof;
    f.slope_se = std::sqrt(1.0 / sxx) * std::max(1.0, std::sqrt(f.chi2_per_dof));
    half = kZ95 * f.slope_se;
  } else {
    f.slope_se = std::sqrt(ss_res / dof / sxx);
    boost::math::students_t t(dof);
    half = boost::math::quantile(boost::math::complement(t, 0.025)) * f.slope_se;
  }
  f.slope_lo = f.slope - half;
  f.slope_hi = f.slope + half;
  return f;
}

double theoretical_slope(double alpha) { return -(0.5 - 0.5 / alpha); }

Estimate estimate_constant(const std::vector<GridPoint>& points, double alpha) {
  const ExponentFit fit = fit_exponent(points);
  const double target = theoretical_slope(alpha);
  constexpr double eps = 1e-9;
  if (target < fit.slope_lo - eps || target > fit.slope_hi + eps)
    throw Error(ErrorCode::ExponentMismatch, "fitted slope " + std::to_string(fit.slope) + " [" +
                                                 std::to_string(fit.slope_lo) + ", " + std::to_string(fit.slope_hi) +
                                                 "] excludes " + std::to_string(target));
  const std::size_t first = points.size() / 2;
  std::vector<double> c, se;
  std::size_t n_total = 0;
  for (std::size_t i = first; i < points.size(); ++i) {
    const double scale = std::pow(points[i].n, -target);
    c.push_back(points[i].estimate.value * scale);
    se.push_back(points[i].estimate.std_error * scale);
    n_total += points[i].estimate.n_samples;
  }
  if (std::all_of(se.begin(), se.end(), [](double s) { return s > 0.0; })) {
    double sw = 0, swc = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      sw += 1.0 / (se[i] * se[i]);
      swc += c[i] / (se[i] * se[i]);
    }
    return Estimate::from_value(swc / sw, std::sqrt(1.0 / sw), n_total);
  }
  Estimate e = Estimate::from_samples(c);
  e.n_samples = n_total;
  return e;
}

ReferenceConstants reference_constants(const IncrementSpec& spec) {
  ReferenceConstants r;
  r.c1 = 1.0 / std::sqrt(std::numbers::pi);
  if (spec.sigma2()) {
    const double sigma = std::sqrt(*spec.sigma2());
    const double ratio = sigma / spec.e_abs();
    r.c2 = std::sqrt(8.0 / std::numbers::pi) * ratio;
    const double top = std::pow(2.0, 0.25) / std::numbers::pi * std::tgamma(0.25) * std::sqrt(ratio) * spec.pos_prob();
    r.eqc_interval = std::make_pair(0.5 * top, top);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Monte Carlo kernels
// ---------------------------------------------------------------------------

Estimate mc_persistence(const IncrementSpec& spec, std::size_t n, std::size_t samples, McOptions mc) {
  if (n < 1 || samples < 1) throw Error(ErrorCode::InvalidParameter, "n and samples must be positive");
  const auto& sample = spec.sampler();
  const std::uint64_t job = job_id(kPersistence, n, mc.job);
  const auto hit = map_indices<std::uint8_t>(samples, mc.shards, [&](std::size_t i) -> std::uint8_t {
    RandomStream rng(mc.seed, job, i);
    double s = 0.0, a = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      s += sample(rng);
      a += s;
      if (!(a > 0.0)) return 0;
    }
    return 1;
  });
  return Estimate::from_count(std::accumulate(hit.begin(), hit.end(), std::size_t{0}), samples);
}

std::vector<GridPoint> mc_persistence_grid(const IncrementSpec& spec, const std::vector<std::size_t>& grid,
                                           std::size_t samples, McOptions mc) {
  std::vector<GridPoint> out;
  for (std::size_t n : grid) out.push_back({static_cast<double>(n), mc_persistence(spec, n, samples, mc)});
  return out;
}

CycleTail mc_cycle_tail(const IncrementSpec& spec, const std::vector<std::size_t>& n_grid, std::size_t samples,
                        std::size_t cap, McOptions mc) {
  if (cap < 2) throw Error(ErrorCode::InvalidParameter, "cap must be >= 2");
  if (samples < 1) throw Error(ErrorCode::InvalidParameter, "samples must be positive");
  const std::uint64_t job = job_id(kCycleTail, cap, mc.job);
  // 0 marks a censored draw (theta > cap).
  const auto theta = map_indices<std::uint32_t>(samples, mc.shards, [&](std::size_t i) -> std::uint32_t {
    RandomStream rng(mc.seed, job, i);
    const CycleDraw c = sample_cycle(spec, rng, cap);
    return c.censored ? 0u : static_cast<std::uint32_t>(c.theta);
  });
  CycleTail out;
  out.samples = samples;
  out.cap = cap;
  out.censored = static_cast<std::size_t>(std::count(theta.begin(), theta.end(), 0u));
  std::vector<std::uint32_t> sorted(theta);
  std::sort(sorted.begin(), sorted.end());
  const double expo = 1.0 - 1.0 / spec.alpha();
  for (std::size_t n : n_grid) {
    const auto ge = static_cast<std::size_t>(
        sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), static_cast<std::uint32_t>(n)));
    const std::size_t sure = n <= cap ? ge + out.censored : ge;
    const std::size_t maybe = out.censored;
    TailPoint p;
    p.n = n;
    p.tail = Estimate::from_count(n <= cap ? sure : sure + maybe, samples);
    p.tail_lo = static_cast<double>(sure) / static_cast<double>(samples);
    p.tail_hi = static_cast<double>(n <= cap ? sure : sure + maybe) / static_cast<double>(samples);
    const double scale = std::pow(static_cast<double>(n), expo);
    p.scaled = Estimate::from_value(p.tail.value * scale, p.tail.std_error * scale, samples);
    p.scaled_lo = p.tail_lo * scale;
    p.scaled_hi = p.tail_hi * scale;
    out.points.push_back(p);
  }
  if (out.points.size() >= 4) {
    std::vector<GridPoint> g;
    for (const auto& p : out.points) g.push_back({static_cast<double>(p.n), p.tail});
    try {
      out.log_slope = fit_exponent(g);
    } catch (const Error&) {
    }
  }
  return out;
}

EtaScaling mc_eta_scaling(const IncrementSpec& spec, std::size_t n, std::size_t samples, McOptions mc,
                          bool jitter) {
  if (n < 1 || samples < 1) throw Error(ErrorCode::InvalidParameter, "n and samples must be positive");
  const auto& sample = spec.sampler();
  const std::uint64_t job = job_id(kEta, n, mc.job);
  EtaScaling out;
  out.n = n;
  out.exponent = 1.0 - 1.0 / spec.alpha();
  out.jittered = jitter;
  const double norm = std::pow(static_cast<double>(n), out.exponent);
  out.scaled = map_indices<double>(samples, mc.shards, [&](std::size_t i) {
    RandomStream rng(mc.seed, job, i);
    double s = draw_first_step(spec, rng, Conditioning::FirstPositive);
    std::size_t eta = 0;
    // crossing at m <= n: S_m <= 0 < S_{m+1}
    for (std::size_t m = 1; m <= n; ++m) {
      const double next = s + sample(rng);
      if (s <= 0.0 && next > 0.0) ++eta;
      s = next;
    }
    const double u = jitter ? rng.uniform() : 0.0;
    return (static_cast<double>(eta) + u) / norm;
  });
  const auto consts = reference_constants(spec);
  out.reference = spec.is_right_exponential() && spec.alpha() == 2.0 && consts.c2.has_value();
  if (out.reference) {
    out.reference_scale = std::sqrt(2.0 / std::numbers::pi) / *consts.c2;
    const double sc = out.reference_scale;
    out.ks = ks_one_sample(out.scaled, [sc](double x) { return x <= 0.0 ? 0.0 : std::erf(x / (sc * std::sqrt(2.0))); });
  }
  return out;
}

KeyIdentity check_key_identity(const IncrementSpec& spec, std::size_t n, std::size_t samples_lhs,
                               std::size_t samples_eta, std::size_t samples_cycles, McOptions mc, std::size_t cap) {
  if (!spec.is_right_exponential())
    throw Error(ErrorCode::InvalidParameter, "the key identity needs a right-exponential law");
  if (n < 1 || samples_lhs < 1 || samples_eta < 1 || samples_cycles < 1)
    throw Error(ErrorCode::InvalidParameter, "n and sample sizes must be positive");
  const auto& sample = spec.sampler();
  KeyIdentity out;

  // LHS: walks of n + 1 steps; every crossing Theta_k <= n needs A > 0 there.
  const std::uint64_t job_l = job_id(kKeyLhs, n, mc.job);
  const auto hit = map_indices<std::uint8_t>(samples_lhs, mc.shards, [&](std::size_t i) -> std::uint8_t {
    RandomStream rng(mc.seed, job_l, i);
    double s = draw_first_step(spec, rng, Conditioning::FirstPositive), a = s;
    for (std::size_t m = 1; m <= n; ++m) {
      const double next = s + sample(rng);
      if (s <= 0.0 && next > 0.0 && !(a > 0.0)) return 0;
      s = next;
      a += s;
    }
    return 1;
  });
  out.lhs = Estimate::from_count(std::accumulate(hit.begin(), hit.end(), std::size_t{0}), samples_lhs);

  // Run A: the law of eta(n).
  const std::uint64_t job_a = job_id(kKeyEta, n, mc.job);
  const auto eta = map_indices<std::uint32_t>(samples_eta, mc.shards, [&](std::size_t i) {
    RandomStream rng(mc.seed, job_a, i);
    double s = draw_first_step(spec, rng, Conditioning::FirstPositive);
    std::uint32_t e = 0;
    for (std::size_t m = 1; m <= n; ++m) {
      const double next = s + sample(rng);
      if (s <= 0.0 && next > 0.0) ++e;
      s = next;
    }
    return e;
  });
  const std::size_t k_max = *std::max_element(eta.begin(), eta.end());
  out.eta_distribution.assign(k_max + 1, 0.0);
  for (auto e : eta) out.eta_distribution[e] += 1.0 / static_cast<double>(samples_eta);

  // Run B: cycle walks, tau = first k with Psi_k <= 0 (k_max + 1 if none).
  const std::uint64_t job_b = job_id(kKeyCycles, n, mc.job);
  struct CycleWalk {
    std::uint32_t tau = 0;
    std::uint32_t rejected = 0;
  };
  const auto walks = map_indices<CycleWalk>(samples_cycles, mc.shards, [&](std::size_t i) {
    RandomStream rng(mc.seed, job_b, i);
    std::size_t rejected = 0;
    double psi = 0.0;
    std::uint32_t k = 0;
    while (k <= k_max) {
      psi += sample_short_cycle(spec, rng, cap, rejected).psi;
      ++k;
      if (!(psi > 0.0)) break;
    }
    if (psi > 0.0) k = static_cast<std::uint32_t>(k_max + 1);
    return CycleWalk{k, static_cast<std::uint32_t>(rejected)};
  });
  std::vector<std::size_t> survive(k_max + 1, 0);  // #{tau > k}
  for (const auto& w : walks) {
    out.rejected_long_cycles += w.rejected;
    for (std::size_t k = 0; k < w.tau && k <= k_max; ++k) ++survive[k];
  }
  std::vector<double> q(k_max + 1);
  for (std::size_t k = 0; k <= k_max; ++k) {
    out.cycle_minimum.push_back(Estimate::from_count(survive[k], samples_cycles));
    q[k] = out.cycle_minimum.back().value;
  }

  // RHS = sum_k h_k q_k; variance from both runs.
  double rhs = 0.0;
  for (std::size_t k = 0; k <= k_max; ++k) rhs += out.eta_distribution[k] * q[k];
  double var_a = 0.0;
  for (std::size_t k = 0; k <= k_max; ++k) var_a += out.eta_distribution[k] * (q[k] - rhs) * (q[k] - rhs);
  var_a /= static_cast<double>(samples_eta);
  std::vector<double> h_cum(k_max + 2, 0.0);  // H(t) = sum_{k<t} h_k
  for (std::size_t k = 0; k <= k_max; ++k) h_cum[k + 1] = h_cum[k] + out.eta_distribution[k];
  double mean_b = 0.0, ss_b = 0.0;
  for (const auto& w : walks) mean_b += h_cum[std::min<std::size_t>(w.tau, k_max + 1)];
  mean_b /= static_cast<double>(samples_cycles);
  for (const auto& w : walks) {
    const double d = h_cum[std::min<std::size_t>(w.tau, k_max + 1)] - mean_b;
    ss_b += d * d;
  }
  const double var_b = samples_cycles > 1 ? ss_b / static_cast<double>(samples_cycles - 1) / static_cast<double>(samples_cycles) : 0.0;
  out.rhs = Estimate::from_value(rhs, std::sqrt(var_a + var_b), samples_eta + samples_cycles);
  const double se = std::hypot(out.lhs.std_error, out.rhs.std_error);
  double diff = out.lhs.value - out.rhs.value;
  if (std::abs(diff) < 1e-12) diff = 0.0;  // rounding in the weighted sum
  out.z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
  return out;
}

Estimate positivity_limit_check(const IncrementSpec& spec, std::size_t n, std::size_t samples, McOptions mc) {
  if (n < 1 || samples < 1) throw Error(ErrorCode::InvalidParameter, "n and samples must be positive");
  const auto& sample = spec.sampler();
  const std::uint64_t job = job_id(kPositivity, n, mc.job);
  const auto hit = map_indices<std::uint8_t>(samples, mc.shards, [&](std::size_t i) -> std::uint8_t {
    RandomStream rng(mc.seed, job, i);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += sample(rng);
    return s > 0.0;
  });
  return Estimate::from_count(std::accumulate(hit.begin(), hit.end(), std::size_t{0}), samples);
}

PsiSymmetry psi_symmetry_check(const IncrementSpec& spec, std::size_t samples, McOptions mc, std::size_t cap) {
  if (!spec.is_right_exponential())
    throw Error(ErrorCode::InvalidParameter, "the psi symmetry test needs a continuous right-exponential law");
  struct Draw {
    double psi = 0.0;
    std::uint32_t rejected = 0;
  };
  const auto draws = [&](std::uint64_t side, double sign) {
    const std::uint64_t job = job_id(kPsiSymmetry, side, mc.job);
    return map_indices<Draw>(samples, mc.shards, [&](std::size_t i) {
      RandomStream rng(mc.seed, job, i);
      std::size_t rejected = 0;
      const CycleDraw c = sample_short_cycle(spec, rng, cap, rejected);
      return Draw{sign * c.psi, static_cast<std::uint32_t>(rejected)};
    });
  };
  PsiSymmetry out;
  std::vector<double> a, b;
  for (const auto& d : draws(0, 1.0)) {
    a.push_back(d.psi);
    out.rejected_long_cycles += d.rejected;
  }
  for (const auto& d : draws(1, -1.0)) {
    b.push_back(d.psi);
    out.rejected_long_cycles += d.rejected;
  }
  out.ks = ks_two_sample(std::move(a), std::move(b));
  return out;
}

bool Sandwich::halved_form_holds() const {
  const double tol = 3.0 * std::hypot(ratio.std_error, upper.std_error);
  return ratio.value >= upper.value / 2.0 - tol && ratio.value <= upper.value + tol;
}

bool Sandwich::shifted_form_holds() const {
  const double tol = 3.0 * std::hypot(ratio.std_error, upper.std_error);
  return ratio.value >= lower.value - tol && ratio.value <= upper.value + tol;
}

Sandwich sandwich_check(const IncrementSpec& spec, std::size_t n, std::size_t samples, McOptions mc,
                        std::size_t extra) {
  if (n < 1 || samples < 1) throw Error(ErrorCode::InvalidParameter, "n and samples must be positive");
  if (extra == 0) extra = 16 * n;
  const auto& sample = spec.sampler();
  const std::uint64_t job = job_id(kSandwich, n, mc.job);
  // bit 0: min_{k<=n} A_k > 0; bit 1: crossings up to eta(n) positive;
  // bit 2: also the next crossing; bit 3: next crossing not reached.
  const auto flags = map_indices<std::uint8_t>(samples, mc.shards, [&](std::size_t i) -> std::uint8_t {
    RandomStream rng(mc.seed, job, i);
    double s = draw_first_step(spec, rng, Conditioning::FirstPositive), a = s;
    bool persist = a > 0.0, cycles = true;
    for (std::size_t m = 1; m <= n; ++m) {
      const double next = s + sample(rng);
      if (s <= 0.0 && next > 0.0 && !(a > 0.0)) cycles = false;
      s = next;
      a += s;
      if (m < n && !(a > 0.0)) persist = false;
    }
    std::uint8_t f = static_cast<std::uint8_t>(persist | (cycles << 1));
    if (!cycles) return f;
    // (s, a) = (S_{n+1}, A_{n+1}); find the first crossing time m > n.
    for (std::size_t m = n + 1; m <= n + extra; ++m) {
      const double next = s + sample(rng);
      if (s <= 0.0 && next > 0.0) return static_cast<std::uint8_t>(f | ((a > 0.0) << 2));
      s = next;
      a += s;
    }
    return static_cast<std::uint8_t>(f | 8);
  });
  std::size_t p = 0, up = 0, low = 0, open = 0;
  for (auto f : flags) {
    p += f & 1;
    up += (f >> 1) & 1;
    low += (f >> 2) & 1;
    open += (f >> 3) & 1;
  }
  Sandwich out;
  out.ratio = Estimate::from_count(p, samples);
  out.upper = Estimate::from_count(up, samples);
  out.lower = Estimate::from_count(low, samples);
  out.lower_hi = static_cast<double>(low + open) / static_cast<double>(samples);
  out.unfinished = open;
  return out;
}

}  // namespace perslab
