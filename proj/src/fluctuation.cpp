#include "perslab/fluctuation.hpp"

#include "perslab/rng.hpp"
#include "perslab/special.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace perslab {

namespace {

template <class T>
PositivitySeq<T> convolve_positivity(const std::vector<std::pair<long, T>>& atoms, long up, std::size_t n_max,
                                     PositivityMode mode, std::size_t max_states) {
  PositivitySeq<T> seq;
  seq.mode = mode;
  seq.probs.assign(n_max + 1, T(0));
  seq.probs[0] = T(1);
  const bool strict = mode == PositivityMode::Strict;
  std::map<long, T> cur{{0, T(1)}};
  const long n = static_cast<long>(n_max);
  for (long k = 1; k <= n; ++k) {
    // S_j <= S_k + up (j - k): below this floor no later time can count.
    const long floor = -up * (n - k);
    std::map<long, T> nxt;
    for (const auto& [s, q] : cur)
      for (const auto& [x, p] : atoms) {
        const long s2 = s + x;
        if (strict ? s2 <= floor : s2 < floor) continue;
        nxt[s2] += q * p;
      }
    if (nxt.size() > max_states)
      throw Error(ErrorCode::StateBudgetExceeded, "positivity convolution exceeded " +
                                                      std::to_string(max_states) + " states at step " +
                                                      std::to_string(k));
    T pos(0);
    for (const auto& [s, q] : nxt)
      if (strict ? s > 0 : s >= 0) pos += q;
    seq.probs[static_cast<std::size_t>(k)] = pos;
    cur = std::move(nxt);
  }
  return seq;
}

}  // namespace

PositivitySeq<Rational> positivity_probs(const IncrementSpec& spec, std::size_t n_max, PositivityMode mode,
                                         std::size_t max_states) {
  if (!spec.is_lattice()) throw Error(ErrorCode::NotLattice, "positivity_probs needs a lattice law");
  const long up = spec.max_up();
  const long lo = -(spec.max_down() ? *spec.max_down() : 2 * up * static_cast<long>(n_max) + 1);
  return convolve_positivity<Rational>(spec.atoms(lo, up), up, n_max, mode, max_states);
}

PositivitySeq<double> positivity_probs_real(const IncrementSpec& spec, std::size_t n_max, PositivityMode mode) {
  if (!spec.is_lattice()) throw Error(ErrorCode::NotLattice, "positivity_probs needs a lattice law");
  const long up = spec.max_up();
  const long lo = -(spec.max_down() ? *spec.max_down() : 2 * up * static_cast<long>(n_max) + 1);
  std::vector<std::pair<long, double>> atoms;
  for (long x = lo; x <= up; ++x)
    if (double p = spec.pmf_real(x); p > 0.0) atoms.emplace_back(x, p);
  return convolve_positivity<double>(atoms, up, n_max, mode, 10'000'000);
}

Rational symmetric_continuous_qn(std::size_t n) {
  BigInt den;
  mpz_ui_pow_ui(den.get_mpz_t(), 4, n);
  Rational r(binomial(2 * n, n), den);
  r.canonicalize();
  return r;
}

// ---------------------------------------------------------------------------

BivariateIncrementSpec make_bivariate(std::string id, std::map<std::pair<long, long>, Rational> pmf) {
  Rational total = 0;
  for (auto it = pmf.begin(); it != pmf.end();) {
    if (it->second < 0) throw Error(ErrorCode::NegativeProbability, "bivariate atom has negative mass");
    total += it->second;
    it = it->second == 0 ? pmf.erase(it) : std::next(it);
  }
  if (total != 1) throw Error(ErrorCode::MassDeficit, "bivariate masses sum to " + to_fraction_string(total));
  BivariateIncrementSpec b;
  b.id = std::move(id);
  b.y_symmetric = std::all_of(pmf.begin(), pmf.end(), [&](const auto& kv) {
    auto it = pmf.find({kv.first.first, -kv.first.second});
    return it != pmf.end() && it->second == kv.second;
  });
  b.pmf = std::move(pmf);
  return b;
}

BivariateIncrementSpec bivariate_preset(std::string_view name) {
  using Pmf = std::map<std::pair<long, long>, Rational>;
  const Rational half(1, 2), quarter(1, 4), eighth(1, 8);
  if (name == "correlated-coin") return make_bivariate("correlated-coin", Pmf{{{1, 1}, half}, {{-1, -1}, half}});
  if (name == "perfectly-correlated")
    return make_bivariate("perfectly-correlated",
                          Pmf{{{1, 1}, quarter}, {{1, -1}, quarter}, {{2, 2}, quarter}, {{2, -2}, quarter}});
  if (name == "independent-coins")
    return make_bivariate("independent-coins",
                          Pmf{{{1, 1}, quarter}, {{1, -1}, quarter}, {{-1, 1}, quarter}, {{-1, -1}, quarter}});
  if (name == "asymmetric-x")
    return make_bivariate("asymmetric-x", Pmf{{{2, 1}, eighth},
                                              {{2, -1}, eighth},
                                              {{-1, 2}, quarter},
                                              {{-1, -2}, quarter},
                                              {{-3, 0}, quarter}});
  throw Error(ErrorCode::ConfigError, "unknown bivariate preset '" + std::string(name) + "'");
}

BivariateIncrementSpec parse_bivariate(std::string id, std::string_view text) {
  std::map<std::pair<long, long>, Rational> pmf;
  std::string item;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, item, ';')) {
    const auto colon = item.find(':');
    const auto comma = item.find(',');
    if (colon == std::string::npos || comma == std::string::npos || comma > colon)
      throw Error(ErrorCode::ConfigError, "bivariate atoms are 'x,y:mass', got '" + item + "'");
    long x = 0, y = 0;
    try {
      x = std::stol(item.substr(0, comma));
      y = std::stol(item.substr(comma + 1, colon - comma - 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "bad bivariate atom '" + item + "'");
    }
    if (pmf.count({x, y})) throw Error(ErrorCode::ConfigError, "repeated bivariate atom '" + item + "'");
    pmf[{x, y}] = parse_rational(item.substr(colon + 1));
  }
  return make_bivariate(std::move(id), std::move(pmf));
}

std::size_t HalfplaneTable::violations() const {
  std::size_t v = 0;
  for (const auto& r : rows) v += !r.indep1_holds() + !r.indep2_holds();
  return v;
}

HalfplaneTable halfplane_measures(const BivariateIncrementSpec& bspec, std::size_t n, std::size_t max_paths) {
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "n must be >= 1");
  const std::vector<std::pair<std::pair<long, long>, Rational>> atoms(bspec.pmf.begin(), bspec.pmf.end());
  if (std::pow(static_cast<double>(atoms.size()), static_cast<double>(n)) > static_cast<double>(max_paths))
    throw Error(ErrorCode::TooLarge, "support^n exceeds the path limit");

  std::map<long, Rational> marginal, weak, strict;
  HalfplaneTable t;
  t.n = n;
  std::vector<Rational> weight(n + 1);
  weight[0] = 1;
  std::function<void(std::size_t, long, long, bool, bool)> walk = [&](std::size_t k, long x, long y, bool nonneg,
                                                                      bool pos) {
    if (k == n) {
      ++t.paths;
      marginal[x] += weight[n];
      if (nonneg) weak[x] += weight[n];
      if (pos) strict[x] += weight[n];
      return;
    }
    for (const auto& [xy, p] : atoms) {
      weight[k + 1] = weight[k] * p;
      const long y2 = y + xy.second;
      walk(k + 1, x + xy.first, y2, nonneg && y2 >= 0, pos && y2 > 0);
    }
  };
  walk(0, 0, 0, true, true);

  t.min_weak = 0;
  t.min_strict = 0;
  for (const auto& [x, q] : weak) t.min_weak += q;
  for (const auto& [x, q] : strict) t.min_strict += q;
  for (const auto& [x, px] : marginal) {
    HalfplaneRow r;
    r.x = x;
    r.lhs1 = weak.count(x) ? weak[x] : Rational(0);
    r.rhs1 = px * t.min_strict;
    r.lhs2 = strict.count(x) ? strict[x] : Rational(0);
    r.rhs2 = px * t.min_weak;
    t.rows.push_back(std::move(r));
  }
  return t;
}

// ---------------------------------------------------------------------------

double ks_p_value(double statistic, double effective_n) {
  if (effective_n <= 0.0) return 1.0;
  const double s = std::sqrt(effective_n);
  return kolmogorov_survival((s + 0.12 + 0.11 / s) * statistic);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  KsResult r;
  r.n1 = a.size();
  r.n2 = b.size();
  if (a.empty() || b.empty()) return r;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  // Step through distinct values so ties move both empirical cdfs together.
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  r.statistic = d;
  r.p_value = ks_p_value(d, na * nb / (na + nb));
  return r;
}

CorollaryCheck corollary_independence_check(const IncrementSpec& spec, std::size_t n, std::size_t samples,
                                            McOptions mc, std::size_t cap) {
  if (!spec.is_right_exponential())
    throw Error(ErrorCode::InvalidParameter, "the independence check needs a continuous right-exponential law");
  if (n < 1 || samples < 1) throw Error(ErrorCode::InvalidParameter, "n and samples must be positive");

  struct Walk {
    double theta_n = 0.0;
    std::uint8_t positive = 0;
    std::uint32_t rejected = 0;
  };
  const auto draw = [&](std::uint64_t job, std::size_t i) {
    RandomStream rng(mc.seed, job, i);
    Walk w;
    std::size_t rejected = 0;
    double psi = 0.0;
    std::size_t theta = 0;
    bool positive = true;
    for (std::size_t k = 0; k < n; ++k) {
      const CycleDraw c = sample_short_cycle(spec, rng, cap, rejected);
      theta += c.theta;
      psi += c.psi;
      positive = positive && psi > 0.0;
    }
    w.theta_n = static_cast<double>(theta);
    w.positive = positive;
    w.rejected = static_cast<std::uint32_t>(rejected);
    return w;
  };

  CorollaryCheck out;
  const std::uint64_t job_cond = job_id(0xC0, n, mc.job);
  const std::uint64_t job_free = job_id(0xC1, n, mc.job);
  std::vector<double> conditioned, unconditioned;
  conditioned.reserve(samples);
  // Batches are evaluated in parallel and consumed in index order, so the
  // accepted sample is the same for any shard count.
  std::size_t next = 0;
  while (conditioned.size() < samples) {
    const std::size_t batch = std::max<std::size_t>(1024, 2 * (samples - conditioned.size()));
    const auto walks = map_indices<Walk>(batch, mc.shards, [&](std::size_t i) { return draw(job_cond, next + i); });
    for (const auto& w : walks) {
      if (conditioned.size() == samples) break;
      ++out.attempted;
      out.rejected_long_cycles += w.rejected;
      if (w.positive) conditioned.push_back(w.theta_n);
    }
    next += batch;
  }
  const auto free = map_indices<Walk>(samples, mc.shards, [&](std::size_t i) { return draw(job_free, i); });
  for (const auto& w : free) {
    unconditioned.push_back(w.theta_n);
    out.rejected_long_cycles += w.rejected;
  }
  out.accepted = conditioned.size();
  out.ks = ks_two_sample(std::move(conditioned), std::move(unconditioned));
  return out;
}

}  // namespace perslab
