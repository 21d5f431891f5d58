#include "perslab/exact.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <tuple>

namespace perslab {

Rational StateLayer::frontier_mass() const {
  Rational t = 0;
  for (const auto& [k, q] : mass) t += q;
  return t;
}

namespace {

void require_lattice(const IncrementSpec& spec) {
  if (!spec.is_lattice()) throw Error(ErrorCode::NotLattice, "exact computation needs a lattice law");
}

void require_rational(const IncrementSpec& spec) {
  require_lattice(spec);
  if (!spec.has_rational_pmf()) throw Error(ErrorCode::NotRational, "exact computation needs rational atoms");
}

BigInt lcm(const BigInt& a, const BigInt& b) {
  BigInt r;
  mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

// Largest negative magnitude that can matter when every A_k must stay
// positive for `horizon` steps: A_k + S_k never exceeds k(k+1)/2 + k.
long relevant_magnitude(const IncrementSpec& spec, std::size_t horizon) {
  if (auto l = spec.max_down()) return *l;
  const long n = static_cast<long>(horizon);
  return n * (n + 1) / 2 + n;
}

[[noreturn]] void budget_exceeded(const std::string& what, std::size_t limit, std::size_t step) {
  throw Error(ErrorCode::StateBudgetExceeded,
              what + " budget " + std::to_string(limit) + " exceeded at step " + std::to_string(step));
}

// Weight tables of the integer-scaled DP. Masses at step k are numerators
// over denom^k (exact) or plain probabilities (float, denom = 1).
template <class T>
struct Weights {
  long up = 1;
  long magnitude = 0;     // atoms cover [-magnitude, up]
  std::vector<T> atom;    // index x + magnitude
  std::vector<T> fail;    // P(x <= -j) for j in [1 - up, magnitude], index j + up - 1
  T denom{1};

  const T& w(long x) const { return atom[static_cast<std::size_t>(x + magnitude)]; }
  T fail_weight(long j) const {
    if (j <= -up) return denom;
    if (j > magnitude) return T(0);
    return fail[static_cast<std::size_t>(j + up - 1)];
  }
};

Weights<BigInt> exact_weights(const IncrementSpec& spec, long magnitude) {
  Weights<BigInt> w;
  w.up = spec.max_up();
  w.magnitude = magnitude;
  std::vector<Rational> p, f;
  BigInt d = 1;
  for (long x = -magnitude; x <= w.up; ++x) {
    p.push_back(spec.pmf(x));
    d = lcm(d, p.back().get_den());
  }
  for (long j = 1 - w.up; j <= magnitude; ++j) {
    f.push_back(spec.cdf(-j));
    d = lcm(d, f.back().get_den());
  }
  w.denom = d;
  for (const auto& q : p) w.atom.emplace_back(q.get_num() * (d / q.get_den()));
  for (const auto& q : f) w.fail.emplace_back(q.get_num() * (d / q.get_den()));
  return w;
}

Weights<double> float_weights(const IncrementSpec& spec, long magnitude) {
  Weights<double> w;
  w.up = spec.max_up();
  w.magnitude = magnitude;
  for (long x = -magnitude; x <= w.up; ++x) w.atom.push_back(spec.pmf_real(x));
  // P(x <= -j) = 1 - P(x > -j), accumulated from the top.
  std::vector<double> above;
  double acc = 0.0;
  for (long x = w.up; x >= -magnitude; --x) {
    above.push_back(acc);  // P(S1 > x)
    acc += w.w(x);
  }
  for (long j = 1 - w.up; j <= magnitude; ++j) {
    // P(S1 <= -j) = 1 - P(S1 > -j)
    const long x = -j;
    const double gt = above[static_cast<std::size_t>(w.up - x)];
    w.fail.push_back(std::max(0.0, 1.0 - gt));
  }
  w.denom = 1.0;
  return w;
}

bool is_zero(const BigInt& v) { return sgn(v) == 0; }
bool is_zero(double v) { return v == 0.0; }

template <class T>
struct Row {
  long a_lo = 1;
  std::vector<T> v;

  long a_hi() const { return a_lo + static_cast<long>(v.size()) - 1; }

  // Grows the row so that [lo, hi] is addressable.
  void cover(long lo, long hi) {
    if (v.empty()) {
      a_lo = lo;
      v.resize(static_cast<std::size_t>(hi - lo + 1));
      return;
    }
    if (lo < a_lo) {
      v.insert(v.begin(), static_cast<std::size_t>(a_lo - lo), T(0));
      a_lo = lo;
    }
    if (hi > a_hi()) v.resize(static_cast<std::size_t>(hi - a_lo + 1));
  }

  void trim() {
    std::size_t b = 0, e = v.size();
    while (b < e && is_zero(v[b])) ++b;
    while (e > b && is_zero(v[e - 1])) --e;
    if (b == e) {
      v.clear();
      return;
    }
    if (b > 0 || e < v.size()) {
      v = std::vector<T>(std::make_move_iterator(v.begin() + static_cast<long>(b)),
                         std::make_move_iterator(v.begin() + static_cast<long>(e)));
      a_lo += static_cast<long>(b);
    }
  }
};

template <class T>
T product(const T& a, const T& b) {
  return a * b;
}

template <class T>
void add_product(T& acc, const T& a, const T& b) {
  acc += a * b;
}

template <>
void add_product<BigInt>(BigInt& acc, const BigInt& a, const BigInt& b) {
  mpz_addmul(acc.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
}

template <class T>
class Engine {
 public:
  Engine(const IncrementSpec& spec, std::size_t horizon, PersistenceDpOptions options,
         Weights<T> weights, double prune_below = 0.0)
      : horizon_(horizon), options_(options), max_down_(spec.max_down()),
        w_(std::move(weights)), prune_below_(prune_below) {
    rows_[0].cover(0, 0);
    rows_[0].v[0] = T(1);
  }

  std::size_t step_index() const { return step_; }
  bool done() const { return step_ >= horizon_; }

  void step() {
    if (done()) return;
    const long m_after = static_cast<long>(horizon_ - step_ - 1);
    std::map<long, Row<T>> next;
    success_ *= w_.denom;
    failure_ *= w_.denom;
    pruned_ *= w_.denom;
    undecided_ *= w_.denom;

    for (const auto& [s, row] : rows_) {
      const long a_hi = row.a_hi();
      const long x_lo = std::max(-w_.magnitude, -(a_hi + s) + 1);
      for (std::size_t i = 0; i < row.v.size(); ++i) {
        const T& m = row.v[i];
        if (is_zero(m)) continue;
        const T f = w_.fail_weight(row.a_lo + static_cast<long>(i) + s);
        if (!is_zero(f)) add_product(failure_, m, f);
      }
      for (long x = x_lo; x <= w_.up; ++x) {
        const T& wx = w_.w(x);
        if (is_zero(wx)) continue;
        const long s2 = s + x;
        // surviving entries: a_lo + i + s2 > 0
        const long i0 = std::max<long>(0, 1 - (row.a_lo + s2));
        if (i0 >= static_cast<long>(row.v.size())) continue;
        transitions_ += row.v.size() - static_cast<std::size_t>(i0);
        if (options_.bridge && !reaches_zero(s2, m_after)) {
          for (std::size_t i = static_cast<std::size_t>(i0); i < row.v.size(); ++i)
            if (!is_zero(row.v[i])) add_product(pruned_, row.v[i], wx);
          continue;
        }
        Row<T>& tgt = next[s2];
        const long shift = s2;  // A' = A + s2
        tgt.cover(row.a_lo + i0 + shift, a_hi + shift);
        const long off = row.a_lo + shift - tgt.a_lo;
        for (std::size_t i = static_cast<std::size_t>(i0); i < row.v.size(); ++i)
          if (!is_zero(row.v[i])) add_product(tgt.v[static_cast<std::size_t>(off + static_cast<long>(i))], row.v[i], wx);
      }
    }
    if (transitions_ > options_.budget.max_transitions)
      budget_exceeded("transition", options_.budget.max_transitions, step_ + 1);

    std::size_t live = 0;
    for (auto it = next.begin(); it != next.end();) {
      absorb(it->first, it->second, m_after);
      if constexpr (std::is_same_v<T, double>) prune(it->second);
      it->second.trim();
      if (it->second.v.empty()) {
        it = next.erase(it);
      } else {
        live += it->second.v.size();
        ++it;
      }
    }
    if (live > options_.budget.max_states) budget_exceeded("state", options_.budget.max_states, step_ + 1);
    rows_ = std::move(next);
    ++step_;
  }

  T frontier() const {
    T t(0);
    for (const auto& [s, row] : rows_)
      for (const auto& m : row.v) t += m;
    return t;
  }
  T frontier_at_zero() const {
    auto it = rows_.find(0);
    T t(0);
    if (it != rows_.end())
      for (const auto& m : it->second.v) t += m;
    return t;
  }

  const std::map<long, Row<T>>& rows() const { return rows_; }
  const T& success() const { return success_; }
  const T& failure() const { return failure_; }
  const T& pruned() const { return pruned_; }
  const T& undecided() const { return undecided_; }
  const Weights<T>& weights() const { return w_; }

 private:
  std::size_t horizon_;
  PersistenceDpOptions options_;
  std::optional<long> max_down_;
  Weights<T> w_;
  double prune_below_;
  std::size_t step_ = 0;
  std::size_t transitions_ = 0;
  std::map<long, Row<T>> rows_;
  T success_{0}, failure_{0}, pruned_{0}, undecided_{0};

  bool reaches_zero(long s, long remaining) const {
    if (s < 0) return -s <= w_.up * remaining;
    if (s > 0) return !max_down_ || s <= *max_down_ * remaining;
    return true;
  }

  // With L = max_down, A + jS - L j(j+1)/2 is concave in j, so positivity at
  // j = 1 and j = m covers every remaining step.
  void absorb(long s, Row<T>& row, long m) {
    if (!options_.absorb_success || options_.bridge || !max_down_ || m < 1) return;
    const long l = *max_down_;
    const long thr = std::max(l - s, l * m * (m + 1) / 2 - m * s);  // absorb when A > thr
    if (row.a_hi() <= thr) return;
    const long keep = std::max<long>(0, thr - row.a_lo + 1);
    for (std::size_t i = static_cast<std::size_t>(keep); i < row.v.size(); ++i) success_ += row.v[i];
    row.v.resize(static_cast<std::size_t>(keep));
  }

  void prune(Row<T>& row) {
    if (prune_below_ <= 0.0) return;
    for (auto& m : row.v)
      if (m != 0.0 && m < prune_below_) {
        undecided_ += m;
        m = 0.0;
      }
  }
};

Rational scaled(const BigInt& num, const BigInt& denom) { return Rational(num, denom); }

}  // namespace

// ---------------------------------------------------------------------------
// PersistenceDp
// ---------------------------------------------------------------------------

struct PersistenceDp::Impl {
  Engine<BigInt> engine;
  BigInt denom_power = 1;  // denom^step
};

PersistenceDp::PersistenceDp(const IncrementSpec& spec, std::size_t horizon, PersistenceDpOptions options) {
  require_rational(spec);
  if (horizon < 1) throw Error(ErrorCode::InvalidParameter, "horizon must be >= 1");
  auto w = exact_weights(spec, relevant_magnitude(spec, horizon));
  impl_ = std::make_unique<Impl>(Impl{Engine<BigInt>(spec, horizon, options, std::move(w)), 1});
}

PersistenceDp::~PersistenceDp() = default;
PersistenceDp::PersistenceDp(PersistenceDp&&) noexcept = default;
PersistenceDp& PersistenceDp::operator=(PersistenceDp&&) noexcept = default;

std::size_t PersistenceDp::step_index() const { return impl_->engine.step_index(); }
bool PersistenceDp::done() const { return impl_->engine.done(); }

void PersistenceDp::step() {
  if (done()) return;
  impl_->engine.step();
  impl_->denom_power *= impl_->engine.weights().denom;
}

StateLayer PersistenceDp::layer() const {
  const auto& e = impl_->engine;
  const BigInt& d = impl_->denom_power;
  StateLayer out;
  out.step = e.step_index();
  for (const auto& [s, row] : e.rows())
    for (std::size_t i = 0; i < row.v.size(); ++i)
      if (sgn(row.v[i]) != 0) out.mass[{s, row.a_lo + static_cast<long>(i)}] = scaled(row.v[i], d);
  out.absorbed_success = scaled(e.success(), d);
  out.absorbed_failure = scaled(e.failure(), d);
  out.pruned = scaled(e.pruned(), d);
  for (auto* q : {&out.absorbed_success, &out.absorbed_failure, &out.pruned}) q->canonicalize();
  for (auto& [k, q] : out.mass) q.canonicalize();
  return out;
}

Rational PersistenceDp::survival() const {
  Rational r(impl_->engine.success() + impl_->engine.frontier(), impl_->denom_power);
  r.canonicalize();
  return r;
}

Rational PersistenceDp::survival_at_zero() const {
  Rational r(impl_->engine.frontier_at_zero(), impl_->denom_power);
  r.canonicalize();
  return r;
}

Rational exact_persistence(const IncrementSpec& spec, std::size_t n, DpBudget budget) {
  PersistenceDpOptions opt;
  opt.budget = budget;
  PersistenceDp dp(spec, n, opt);
  dp.run();
  return dp.survival();
}

FloatPersistence exact_persistence_float(const IncrementSpec& spec, std::size_t n, double prune_below,
                                         DpBudget budget) {
  require_lattice(spec);
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "horizon must be >= 1");
  PersistenceDpOptions opt;
  opt.budget = budget;
  Engine<double> e(spec, n, opt, float_weights(spec, relevant_magnitude(spec, n)), prune_below);
  while (!e.done()) e.step();
  FloatPersistence out;
  out.value = e.success() + e.frontier();
  out.lower = out.value;
  out.upper = std::min(1.0, out.value + e.undecided());
  return out;
}

// ---------------------------------------------------------------------------
// Bridge
// ---------------------------------------------------------------------------

namespace {

// Exact law of S_k restricted to values that can still return to 0 by
// time n_max; reports P(S_k = 0) for k = 1..n_max.
std::vector<Rational> zero_probabilities(const IncrementSpec& spec, std::size_t n_max) {
  require_rational(spec);
  const long up = spec.max_up();
  const auto down = spec.max_down();
  const long n = static_cast<long>(n_max);
  const long lo_atom = -(down ? *down : up * n);
  const auto atoms = spec.atoms(lo_atom, up);
  std::map<long, Rational> cur{{0, Rational(1)}};
  std::vector<Rational> out;
  for (long k = 1; k <= n; ++k) {
    const long rem = n - k;
    std::map<long, Rational> nxt;
    for (const auto& [s, q] : cur)
      for (const auto& [x, p] : atoms) {
        const long s2 = s + x;
        if (s2 < -up * rem) continue;
        if (down && s2 > *down * rem) continue;
        nxt[s2] += q * p;
      }
    cur = std::move(nxt);
    auto it = cur.find(0);
    out.push_back(it == cur.end() ? Rational(0) : it->second);
  }
  return out;
}

}  // namespace

Rational exact_zero_probability(const IncrementSpec& spec, std::size_t n) {
  if (n == 0) return 1;
  return zero_probabilities(spec, n).back();
}

std::vector<BridgePoint> bridge_series(const IncrementSpec& spec, std::size_t n_max, DpBudget budget) {
  require_rational(spec);
  if (n_max < 1) throw Error(ErrorCode::InvalidParameter, "n_max must be >= 1");
  const auto zero = zero_probabilities(spec, n_max);
  PersistenceDpOptions opt;
  opt.bridge = true;
  opt.absorb_success = false;
  opt.budget = budget;
  PersistenceDp dp(spec, n_max, opt);
  std::vector<BridgePoint> out;
  for (std::size_t k = 1; k <= n_max; ++k) {
    dp.step();
    const Rational& z = zero[k - 1];
    if (z == 0) continue;
    BridgePoint b;
    b.n = k;
    b.joint = dp.survival_at_zero();
    b.zero_prob = z;
    b.value = b.joint / z;
    out.push_back(std::move(b));
  }
  return out;
}

Rational exact_bridge_persistence(const IncrementSpec& spec, std::size_t n, DpBudget budget) {
  require_rational(spec);
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "n must be >= 1");
  if (exact_zero_probability(spec, n) == 0)
    throw Error(ErrorCode::NotInBridgeSet, "P(S_" + std::to_string(n) + " = 0) = 0");
  const auto series = bridge_series(spec, n, budget);
  return series.back().value;
}

// ---------------------------------------------------------------------------
// Brute-force oracles
// ---------------------------------------------------------------------------

Rational enumerate_persistence(const IncrementSpec& spec, std::size_t n, std::size_t max_paths) {
  require_rational(spec);
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "n must be >= 1");
  const long up = spec.max_up();
  const long nn = static_cast<long>(n);
  const long down = spec.max_down().value_or(nn * (nn + 1) / 2 + nn);
  if (spec.has_finite_support()) {
    const double support = static_cast<double>(spec.atoms(-down, up).size());
    if (std::pow(support, static_cast<double>(n)) > static_cast<double>(max_paths))
      throw Error(ErrorCode::TooLarge, "support^n exceeds the path limit");
  }
  // Integer weights over a common denominator d: P(x) = weight[x] / d.
  std::vector<long> xs;
  std::vector<Rational> probs;
  BigInt d = 1;
  for (long x = up; x >= -down; --x) {
    Rational p = spec.pmf(x);
    if (p == 0) continue;
    xs.push_back(x);
    d = lcm(d, p.get_den());
    probs.push_back(std::move(p));
  }
  std::vector<BigInt> weight;
  for (const auto& p : probs) weight.emplace_back(p.get_num() * (d / p.get_den()));

  std::vector<BigInt> path_weight(n + 1);
  path_weight[0] = 1;
  BigInt total = 0;
  std::size_t paths = 0;
  // xs is sorted descending, so the surviving steps form a prefix.
  std::function<void(std::size_t, long, long)> walk = [&](std::size_t k, long s, long a) {
    if (k == n) {
      total += path_weight[n];
      if (++paths > max_paths) throw Error(ErrorCode::TooLarge, "surviving paths exceed the limit");
      return;
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const long s2 = s + xs[i];
      const long a2 = a + s2;
      if (a2 <= 0) break;
      mpz_mul(path_weight[k + 1].get_mpz_t(), path_weight[k].get_mpz_t(), weight[i].get_mpz_t());
      walk(k + 1, s2, a2);
    }
  };
  walk(0, 0, 0);
  BigInt dn;
  mpz_pow_ui(dn.get_mpz_t(), d.get_mpz_t(), n);
  Rational r(total, dn);
  r.canonicalize();
  return r;
}

Rational enumerate_cycle_minimum(const IncrementSpec& spec, std::size_t n, std::size_t max_paths) {
  require_rational(spec);
  if (!spec.has_finite_support()) throw Error(ErrorCode::TooLarge, "cycle enumeration needs finite support");
  const long up = spec.max_up();
  const long down = *spec.max_down();
  const auto atoms = spec.atoms(-down, up);
  const std::size_t steps = n + 1;
  if (std::pow(static_cast<double>(atoms.size()), static_cast<double>(steps)) > static_cast<double>(max_paths))
    throw Error(ErrorCode::TooLarge, "support^(n+1) exceeds the path limit");
  Rational pos = 0;
  for (const auto& [x, p] : atoms)
    if (x > 0) pos += p;

  Rational total = 0;
  std::vector<double> walk(steps);
  std::function<void(std::size_t, long, const Rational&)> rec = [&](std::size_t k, long s, const Rational& w) {
    if (k == steps) {
      const Trajectory t = Trajectory::from_walk(walk);
      const CycleRecord c = decompose(t, CrossingConvention::WeakUp);
      const std::size_t eta = cycles_up_to(c, n);
      for (std::size_t j = 1; j <= eta; ++j)
        if (!(c.psi_big[j] > 0.0)) return;
      total += w;
      return;
    }
    for (const auto& [x, p] : atoms) {
      if (k == 0 && x <= 0) continue;
      walk[k] = static_cast<double>(s + x);
      rec(k + 1, s + x, w * (k == 0 ? Rational(p / pos) : p));
    }
  };
  rec(0, 0, Rational(1));
  return total;
}

// ---------------------------------------------------------------------------
// Cycle laws
// ---------------------------------------------------------------------------

namespace {

struct CycleState {
  long s = 0;
  long a = 0;
  long hat_t = 0;
  long hat_a = 0;
  bool pending = false;
  auto operator<=>(const CycleState&) const = default;
};

// Lowest and highest values from which the walk could still reach a cut
// window [-up, 0] within `remaining` steps.
bool can_still_cut(long s, long remaining, long up, std::optional<long> down) {
  if (s < -up) return -up - s <= up * remaining;
  if (s > 0) return !down || s <= *down * remaining;
  return true;
}

}  // namespace

CycleLaw exact_cycle_law(const IncrementSpec& spec, std::size_t horizon, CrossingConvention convention,
                         DpBudget budget) {
  require_rational(spec);
  if (horizon < 1) throw Error(ErrorCode::InvalidParameter, "horizon must be >= 1");
  const long up = spec.max_up();
  const auto down = spec.max_down();
  const long h = static_cast<long>(horizon);
  const long floor_x = -(down ? *down : up * (h + 1) + 1);

  const Rational p0 = spec.pmf(0);
  const auto prob_gt = [&](long k) { return Rational(1 - spec.cdf(k)); };
  const auto atoms = spec.atoms(floor_x, up);

  CycleLaw law;
  law.convention = convention;
  law.horizon = horizon;
  Rational residual = 0;

  // Start: S_1 ~ P(. | S1 > 0), or P(. | S1 != 0) when leaving zero.
  std::map<CycleState, Rational> cur;
  {
    const bool leave = convention == CrossingConvention::LeaveZero;
    const Rational norm = leave ? Rational(1 - p0) : prob_gt(0);
    Rational below = leave ? spec.cdf(floor_x - 1) / norm : Rational(0);
    residual += below;
    for (const auto& [x, p] : atoms) {
      if (leave ? x == 0 : x <= 0) continue;
      CycleState st{x, x, x < 0 ? 1 : 0, x < 0 ? x : 0, false};
      cur[st] += p / norm;
    }
  }

  std::size_t transitions = 0;
  const Rational pending_cut = up > 0 ? Rational(prob_gt(0) / (1 - p0)) : Rational(0);
  for (long n = 1; n <= h; ++n) {
    std::map<CycleState, Rational> nxt;
    for (const auto& [st, q] : cur) {
      if (!can_still_cut(st.s, h - n, up, down)) {
        residual += q;
        continue;
      }
      // Cut at time n: the set of cutting next values is determined by S_n.
      std::optional<long> cut_from;  // cut iff x > cut_from (or x != 0 for LeaveZero)
      bool leave_cut = false;
      bool after_negative = false;
      switch (convention) {
        case CrossingConvention::WeakUp:
          if (st.s <= 0) cut_from = -st.s;
          break;
        case CrossingConvention::StrictUp:
          if (st.s < 0) cut_from = -st.s - 1;
          break;
        case CrossingConvention::LeaveZero:
          leave_cut = st.s == 0;
          break;
        case CrossingConvention::LastNegative:
          after_negative = st.s < 0 || st.pending;
          if (after_negative) cut_from = -st.s;
          break;
      }
      const bool last_neg = convention == CrossingConvention::LastNegative;
      const LengthArea pair = last_neg ? LengthArea{st.hat_t, st.hat_a} : LengthArea{n, st.a};
      const LengthArea hat{st.hat_t, st.hat_a};
      if (leave_cut) {
        const Rational m = q * (1 - p0);
        law.pair_law.add(pair, m);
        law.hat_law.add(hat, m);
        if (p0 == 0) continue;
        if (n == h) {
          residual += q * p0;
        } else {
          nxt[CycleState{0, st.a, st.hat_t, st.hat_a, false}] += q * p0;
        }
        continue;
      }
      if (cut_from) {
        const Rational m = q * prob_gt(*cut_from);
        law.pair_law.add(pair, m);
        law.hat_law.add(hat, m);
      }
      // Steps that do not cut. Values far below cannot reach a cut window.
      const long x_min = std::max(floor_x, -up * (h - n) - up - st.s);
      const long x_max = cut_from ? std::min(up, *cut_from) : up;
      if (x_min > x_max) {
        residual += q * (1 - (cut_from ? prob_gt(*cut_from) : Rational(0)));
        continue;
      }
      residual += q * spec.cdf(x_min - 1);
      for (const auto& [x, p] : atoms) {
        if (x < x_min || x > x_max) continue;
        const long s2 = st.s + x;
        const long a2 = st.a + s2;
        const Rational m = q * p;
        CycleState nx{s2, a2, st.hat_t, st.hat_a, last_neg && after_negative && s2 == 0};
        if (s2 < 0) {
          nx.hat_t = n + 1;
          nx.hat_a = a2;
        }
        if (n == h) {
          // A pending zero run after the last negative value still cuts at
          // hat_t <= horizon if the walk next leaves zero upwards.
          if (nx.pending && pending_cut != 0) {
            law.pair_law.add({nx.hat_t, nx.hat_a}, m * pending_cut);
            law.hat_law.add({nx.hat_t, nx.hat_a}, m * pending_cut);
            residual += m * (1 - pending_cut);
          } else {
            residual += m;
          }
          continue;
        }
        nxt[nx] += m;
        ++transitions;
      }
    }
    if (nxt.size() > budget.max_states) budget_exceeded("state", budget.max_states, static_cast<std::size_t>(n));
    if (transitions > budget.max_transitions)
      budget_exceeded("transition", budget.max_transitions, static_cast<std::size_t>(n));
    cur = std::move(nxt);
  }
  for (const auto& [st, q] : cur) residual += q;
  law.residual = residual;
  return law;
}

std::vector<double> cycle_length_law(const IncrementSpec& spec, std::size_t horizon,
                                     CrossingConvention convention) {
  require_lattice(spec);
  if (convention == CrossingConvention::LastNegative)
    throw Error(ErrorCode::InvalidParameter, "length law does not support last-negative cuts");
  const long up = spec.max_up();
  const auto down = spec.max_down();
  const long h = static_cast<long>(horizon);
  const long floor_x = -(down ? *down : up * (h + 1) + 1);
  std::vector<std::pair<long, double>> atoms;
  for (long x = floor_x; x <= up; ++x)
    if (double p = spec.pmf_real(x); p > 0.0) atoms.emplace_back(x, p);
  double p0 = spec.pmf_real(0), p_pos = 0.0;
  for (const auto& [x, p] : atoms)
    if (x > 0) p_pos += p;
  // P(x > k) for the relevant k, by direct summation.
  const auto gt = [&](long k) {
    double t = 0.0;
    for (const auto& [x, p] : atoms)
      if (x > k) t += p;
    return t;
  };

  std::vector<double> law(horizon + 1, 0.0);
  std::map<long, double> cur;
  const bool leave = convention == CrossingConvention::LeaveZero;
  const double norm = leave ? 1.0 - p0 : p_pos;
  for (const auto& [x, p] : atoms)
    if (leave ? x != 0 : x > 0) cur[x] += p / norm;

  for (long n = 1; n <= h; ++n) {
    std::map<long, double> nxt;
    for (const auto& [s, q] : cur) {
      if (!can_still_cut(s, h - n, up, down)) continue;
      std::optional<long> cut_from;
      if (convention == CrossingConvention::WeakUp && s <= 0) cut_from = -s;
      if (convention == CrossingConvention::StrictUp && s < 0) cut_from = -s - 1;
      if (leave && s == 0) {
        law[static_cast<std::size_t>(n)] += q * (1.0 - p0);
        if (n < h && p0 > 0.0) nxt[0] += q * p0;
        continue;
      }
      if (cut_from) law[static_cast<std::size_t>(n)] += q * gt(*cut_from);
      if (n == h) continue;
      const long x_min = -up * (h - n) - up - s;
      for (const auto& [x, p] : atoms) {
        if (x < x_min || (cut_from && x > *cut_from)) continue;
        nxt[s + x] += q * p;
      }
    }
    cur = std::move(nxt);
  }
  return law;
}

SymmetryAudit symmetry_audit(const ExactDist2& law) {
  SymmetryAudit out;
  for (const auto& [key, q] : law.atoms) {
    const Rational mirror = law.mass({key.first, -key.second});
    Rational diff = q - mirror;
    if (diff < 0) diff = -diff;
    if (diff > out.max_abs_asymmetry) {
      out.max_abs_asymmetry = diff;
      out.worst_atom = key;
    }
  }
  return out;
}

}  // namespace perslab
