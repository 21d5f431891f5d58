#include "perslab/increments.hpp"

#include "perslab/special.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace perslab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Rational pow_q(const Rational& base, unsigned long e) {
  BigInt num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), e);
  return Rational(num, den);
}

// Closed forms over the geometric tail sum_{j>=0} coef ratio^j (first + j)^m.
Rational tail_mass(const NegativePmf::GeometricTail& t) {
  return t.coef / (1 - t.ratio);
}
Rational tail_first_moment(const NegativePmf::GeometricTail& t) {
  const Rational one_minus = 1 - t.ratio;
  return t.coef * (Rational(t.first) / one_minus + t.ratio / (one_minus * one_minus));
}
Rational tail_second_moment(const NegativePmf::GeometricTail& t) {
  const Rational r = t.ratio;
  const Rational om = 1 - r;
  const Rational f(t.first);
  return t.coef * (f * f / om + 2 * f * r / (om * om) + r * (1 + r) / (om * om * om));
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

bool close_rel(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

double neg_mean(const NegativeLaw& law) {
  return std::visit(Overloaded{[](const NegExponential& e) { return 1.0 / e.rate; },
                               [](const NegPoint& p) { return p.value; }},
                    law);
}
double neg_second_moment(const NegativeLaw& law) {
  return std::visit(
      Overloaded{[](const NegExponential& e) { return 2.0 / (e.rate * e.rate); },
                 [](const NegPoint& p) { return p.value * p.value; }},
      law);
}

LatticeInfo lattice_from_support(const std::vector<long>& support) {
  long d = 0;
  for (long x : support) d = std::gcd(d, std::abs(x));
  LatticeInfo info;
  if (d == 0) return info;  // degenerate at 0; rejected elsewhere
  long h = 0;
  const long x0 = support.front() / d;
  for (long x : support) h = std::gcd(h, std::abs(x / d - x0));
  if (h == 0) h = 1;
  info.span = d;
  info.subspan = h;
  info.shift = ((x0 % h) + h) % h;
  return info;
}

void require_probability(const Rational& q, const char* what) {
  if (q < 0) throw Error(ErrorCode::NegativeProbability, std::string(what) + " is negative");
  if (q > 1) throw Error(ErrorCode::MassDeficit, std::string(what) + " exceeds 1");
}

std::pair<double, double> solve_heavy_tail(double alpha, long k0) {
  const long double z_alpha = hurwitz_zeta(alpha, static_cast<long double>(k0));
  const long double z_alpha1 = hurwitz_zeta(alpha + 1.0L, static_cast<long double>(k0));
  const long double c = 1.0L / (z_alpha + z_alpha1);
  return {static_cast<double>(c * z_alpha), static_cast<double>(c)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

ValidationReport validate(const Family& family) {
  ValidationReport r;
  std::visit(
      Overloaded{
          [&](const SimpleWalk&) {
            r.centered = r.unit_mass = r.right_continuous = true;
            r.lattice = LatticeInfo{1, 2, 1};
            r.mean = "0/1";
            r.mass = "1/1";
          },
          [&](const LazySimpleWalk& f) {
            require_probability(f.stay_prob, "stay_prob");
            if (f.stay_prob == 1)
              throw Error(ErrorCode::InvalidParameter, "stay_prob = 1 is degenerate");
            r.centered = r.unit_mass = r.right_continuous = true;
            r.lattice = f.stay_prob == 0 ? LatticeInfo{1, 2, 1} : LatticeInfo{1, 1, 0};
            r.mean = "0/1";
            r.mass = "1/1";
          },
          [&](const RightContinuousLattice& f) {
            require_probability(f.up_prob, "up_prob");
            if (f.up_prob == 0) throw Error(ErrorCode::InvalidParameter, "up_prob must be positive");
            Rational mass = f.up_prob;
            Rational first = 0;
            std::vector<long> support{1};
            for (const auto& [k, q] : f.neg.head) {
              if (k < 0) throw Error(ErrorCode::InvalidParameter, "neg_pmf keys are magnitudes >= 0");
              require_probability(q, "neg_pmf atom");
              mass += q;
              first += k * q;
              if (q > 0) support.push_back(-k);
            }
            if (const auto& t = f.neg.tail) {
              if (t->coef < 0) throw Error(ErrorCode::NegativeProbability, "tail coefficient is negative");
              if (t->ratio < 0 || t->ratio >= 1)
                throw Error(ErrorCode::InvalidParameter, "tail ratio must lie in [0, 1)");
              if (!f.neg.head.empty() && t->first <= f.neg.head.rbegin()->first)
                throw Error(ErrorCode::InvalidParameter, "tail must start after the head table");
              if (t->first < 0) throw Error(ErrorCode::InvalidParameter, "tail start must be >= 0");
              mass += tail_mass(*t);
              first += tail_first_moment(*t);
              if (t->coef > 0) {
                support.push_back(-t->first);
                if (t->ratio > 0) support.push_back(-t->first - 1);
              }
            }
            r.mass = to_fraction_string(mass);
            r.unit_mass = mass == 1;
            if (!r.unit_mass)
              throw Error(ErrorCode::MassDeficit, "total mass is " + r.mass + ", not 1");
            const Rational mean = f.up_prob - first;
            r.mean = to_fraction_string(mean);
            r.centered = mean == 0;
            if (!r.centered) throw Error(ErrorCode::NonCentered, "mean is " + r.mean);
            r.right_continuous = true;
            r.lattice = lattice_from_support(support);
          },
          [&](const RightExponential& f) {
            if (!(f.pos_prob > 0 && f.pos_prob < 1))
              throw Error(ErrorCode::InvalidParameter, "pos_prob must lie in (0, 1)");
            if (!(f.rate > 0)) throw Error(ErrorCode::InvalidParameter, "rate must be positive");
            std::visit(Overloaded{[](const NegExponential& e) {
                                    if (!(e.rate > 0))
                                      throw Error(ErrorCode::InvalidParameter,
                                                  "negative exponential rate must be positive");
                                  },
                                  [](const NegPoint& p) {
                                    if (!(p.value >= 0))
                                      throw Error(ErrorCode::InvalidParameter,
                                                  "negative point mass must sit at -value <= 0");
                                  }},
                       f.neg);
            const double mean = f.pos_prob / f.rate - (1.0 - f.pos_prob) * neg_mean(f.neg);
            r.mean = format_double(mean);
            r.mass = "1";
            r.unit_mass = true;
            r.centered = close_rel(f.pos_prob / f.rate, (1.0 - f.pos_prob) * neg_mean(f.neg));
            if (!r.centered) throw Error(ErrorCode::NonCentered, "mean is " + r.mean);
            r.right_exponential = true;
          },
          [&](const HeavyTailRightContinuous& f) {
            if (!(f.alpha > 1.0 && f.alpha < 2.0))
              throw Error(ErrorCode::InvalidParameter, "alpha must lie in (1, 2)");
            if (f.k0 < 1) throw Error(ErrorCode::InvalidParameter, "k0 must be >= 1");
            r.centered = r.unit_mass = r.right_continuous = true;
            r.mean = "0 (closed form)";
            r.mass = "1 (closed form)";
            r.lattice = lattice_from_support({1, -f.k0, -f.k0 - 1});
          },
      },
      family);
  return r;
}

// ---------------------------------------------------------------------------
// IncrementSpec
// ---------------------------------------------------------------------------

IncrementSpec::IncrementSpec(Family family) : family_(std::move(family)) {
  report_ = validate(family_);
  std::visit(Overloaded{
                 [&](const SimpleWalk&) { moments_ = {0.0, 1.0, 1.0, 0.5}; },
                 [&](const LazySimpleWalk& f) {
                   const double s = f.stay_prob.get_d();
                   moments_ = {0.0, 1.0 - s, 1.0 - s, 0.5 * (1.0 - s)};
                 },
                 [&](const RightContinuousLattice&) {
                   const auto m = exact_moments(*this);
                   moments_ = {0.0, m.variance.get_d(), m.e_abs.get_d(), m.pos_prob.get_d()};
                 },
                 [&](const RightExponential& f) {
                   const double p = f.pos_prob;
                   const double var =
                       p * 2.0 / (f.rate * f.rate) + (1.0 - p) * neg_second_moment(f.neg);
                   moments_ = {0.0, var, 2.0 * p / f.rate, p};
                 },
                 [&](const HeavyTailRightContinuous& f) {
                   std::tie(heavy_p_, heavy_c_) = solve_heavy_tail(f.alpha, f.k0);
                   alpha_ = f.alpha;
                   moments_ = {0.0, std::nullopt, 2.0 * heavy_p_, heavy_p_};
                 },
             },
             family_);
  sampler_ = std::make_shared<const IncrementSampler>(*this);
}

IncrementSpec IncrementSpec::simple() { return IncrementSpec(SimpleWalk{}); }

IncrementSpec IncrementSpec::lazy(Rational stay_prob) {
  return IncrementSpec(LazySimpleWalk{std::move(stay_prob)});
}

IncrementSpec IncrementSpec::geometric() {
  RightContinuousLattice f;
  f.up_prob = Rational(2, 3);
  f.neg.tail = NegativePmf::GeometricTail{1, Rational(1, 6), Rational(1, 2)};
  return IncrementSpec(std::move(f));
}

IncrementSpec IncrementSpec::laplace(double rate) {
  return IncrementSpec(RightExponential{0.5, rate, NegExponential{rate}});
}

IncrementSpec IncrementSpec::heavy_tail(double alpha, long k0) {
  return IncrementSpec(HeavyTailRightContinuous{alpha, k0});
}

std::string_view IncrementSpec::family_name() const {
  return std::visit(Overloaded{[](const SimpleWalk&) { return "simple"; },
                               [](const LazySimpleWalk&) { return "lazy"; },
                               [](const RightContinuousLattice&) { return "right_continuous"; },
                               [](const RightExponential&) { return "right_exponential"; },
                               [](const HeavyTailRightContinuous&) { return "heavy_tail"; }},
                    family_);
}

std::string IncrementSpec::id() const {
  return std::visit(
      Overloaded{
          [](const SimpleWalk&) { return std::string("simple"); },
          [](const LazySimpleWalk& f) { return "lazy(" + to_fraction_string(f.stay_prob) + ")"; },
          [](const RightContinuousLattice& f) {
            std::string s = "rc(" + to_fraction_string(f.up_prob);
            if (f.neg.tail) s += ";geom " + to_fraction_string(f.neg.tail->ratio);
            return s + ")";
          },
          [](const RightExponential& f) {
            if (const auto* e = std::get_if<NegExponential>(&f.neg);
                e && f.pos_prob == 0.5 && e->rate == f.rate)
              return "laplace(" + format_double(f.rate) + ")";
            return "rexp(" + format_double(f.pos_prob) + ";" + format_double(f.rate) + ")";
          },
          [](const HeavyTailRightContinuous& f) {
            std::string s = "heavy(" + format_double(f.alpha);
            if (f.k0 != 1) s += ";" + std::to_string(f.k0);
            return s + ")";
          },
      },
      family_);
}

bool IncrementSpec::has_rational_pmf() const {
  return std::holds_alternative<SimpleWalk>(family_) ||
         std::holds_alternative<LazySimpleWalk>(family_) ||
         std::holds_alternative<RightContinuousLattice>(family_);
}

bool IncrementSpec::has_finite_support() const {
  return is_lattice() && max_down().has_value();
}

long IncrementSpec::max_up() const {
  if (!is_lattice()) throw Error(ErrorCode::NotLattice, "right-exponential law has no lattice");
  return 1;
}

std::optional<long> IncrementSpec::max_down() const {
  return std::visit(
      Overloaded{[](const SimpleWalk&) -> std::optional<long> { return 1; },
                 [](const LazySimpleWalk&) -> std::optional<long> { return 1; },
                 [](const RightContinuousLattice& f) -> std::optional<long> {
                   if (f.neg.tail && f.neg.tail->coef > 0) return std::nullopt;
                   long m = 0;
                   for (const auto& [k, q] : f.neg.head)
                     if (q > 0) m = std::max(m, k);
                   return m;
                 },
                 [](const RightExponential&) -> std::optional<long> { return std::nullopt; },
                 [](const HeavyTailRightContinuous&) -> std::optional<long> {
                   return std::nullopt;
                 }},
      family_);
}

Rational IncrementSpec::pmf(long k) const {
  return std::visit(
      Overloaded{
          [&](const SimpleWalk&) { return (k == 1 || k == -1) ? Rational(1, 2) : Rational(0); },
          [&](const LazySimpleWalk& f) {
            if (k == 0) return f.stay_prob;
            if (k == 1 || k == -1) return Rational((1 - f.stay_prob) / 2);
            return Rational(0);
          },
          [&](const RightContinuousLattice& f) {
            if (k == 1) return f.up_prob;
            if (k > 1) return Rational(0);
            const long m = -k;
            if (auto it = f.neg.head.find(m); it != f.neg.head.end()) return it->second;
            if (f.neg.tail && m >= f.neg.tail->first)
              return Rational(f.neg.tail->coef *
                              pow_q(f.neg.tail->ratio, static_cast<unsigned long>(m - f.neg.tail->first)));
            return Rational(0);
          },
          [&](const RightExponential&) -> Rational {
            throw Error(ErrorCode::NotLattice, "right-exponential law has no pmf");
          },
          [&](const HeavyTailRightContinuous&) -> Rational {
            throw Error(ErrorCode::NotRational, "heavy-tail atoms are irrational; use pmf_real");
          },
      },
      family_);
}

double IncrementSpec::pmf_real(long k) const {
  if (const auto* h = std::get_if<HeavyTailRightContinuous>(&family_)) {
    if (k == 1) return heavy_p_;
    if (k <= -h->k0) return heavy_c_ * std::pow(static_cast<double>(-k), -h->alpha - 1.0);
    return 0.0;
  }
  return pmf(k).get_d();
}

Rational IncrementSpec::cdf(long k) const {
  return std::visit(
      Overloaded{
          [&](const SimpleWalk&) {
            return k < -1 ? Rational(0) : (k < 1 ? Rational(1, 2) : Rational(1));
          },
          [&](const LazySimpleWalk& f) {
            const Rational side = (1 - f.stay_prob) / 2;
            if (k < -1) return Rational(0);
            if (k < 0) return side;
            if (k < 1) return Rational(side + f.stay_prob);
            return Rational(1);
          },
          [&](const RightContinuousLattice& f) {
            if (k >= 1) return Rational(1);
            const long m = -k;  // P(magnitude >= m)
            Rational s = 0;
            for (auto it = f.neg.head.lower_bound(m); it != f.neg.head.end(); ++it) s += it->second;
            if (const auto& t = f.neg.tail) {
              const long from = std::max(m, t->first);
              s += t->coef * pow_q(t->ratio, static_cast<unsigned long>(from - t->first)) / (1 - t->ratio);
            }
            return s;
          },
          [&](const RightExponential&) -> Rational {
            throw Error(ErrorCode::NotLattice, "right-exponential law has no lattice cdf");
          },
          [&](const HeavyTailRightContinuous&) -> Rational {
            throw Error(ErrorCode::NotRational, "heavy-tail masses are irrational");
          },
      },
      family_);
}

std::vector<std::pair<long, Rational>> IncrementSpec::atoms(long lo, long hi) const {
  std::vector<std::pair<long, Rational>> out;
  if (lo > hi) return out;
  hi = std::min(hi, max_up());
  if (const auto* f = std::get_if<RightContinuousLattice>(&family_)) {
    // Walk the geometric tail by repeated multiplication instead of powers.
    const auto& t = f->neg.tail;
    Rational tail_atom;
    long tail_k = 0;
    if (t && -lo >= t->first) {
      tail_k = -lo;
      tail_atom = t->coef * pow_q(t->ratio, static_cast<unsigned long>(tail_k - t->first));
    }
    for (long x = lo; x <= hi; ++x) {
      Rational q;
      if (x == 1) {
        q = f->up_prob;
      } else if (x <= 0) {
        const long m = -x;
        if (t && m >= t->first) {
          while (tail_k > m) {
            tail_atom /= t->ratio;
            --tail_k;
          }
          q = tail_atom;
        } else if (auto it = f->neg.head.find(m); it != f->neg.head.end()) {
          q = it->second;
        }
      }
      if (q > 0) out.emplace_back(x, std::move(q));
    }
    return out;
  }
  for (long x = lo; x <= hi; ++x) {
    Rational q = pmf(x);
    if (q > 0) out.emplace_back(x, std::move(q));
  }
  return out;
}

std::pair<double, double> IncrementSpec::heavy_tail_constants() const {
  if (!std::holds_alternative<HeavyTailRightContinuous>(family_))
    throw Error(ErrorCode::InvalidParameter, "not a heavy-tail family");
  return {heavy_p_, heavy_c_};
}

Moments moments(const IncrementSpec& spec) { return spec.moments_; }

double variance(const IncrementSpec& spec) {
  const auto m = moments(spec);
  if (!m.variance) throw Error(ErrorCode::VarianceUndefined, "variance is infinite for alpha < 2");
  return *m.variance;
}

ExactMoments exact_moments(const IncrementSpec& spec) {
  return std::visit(
      Overloaded{
          [](const SimpleWalk&) {
            return ExactMoments{0, 1, 1, Rational(1, 2)};
          },
          [](const LazySimpleWalk& f) {
            const Rational m = 1 - f.stay_prob;
            return ExactMoments{0, m, m, Rational(m / 2)};
          },
          [](const RightContinuousLattice& f) {
            Rational first = 0, second = 0;
            for (const auto& [k, q] : f.neg.head) {
              first += k * q;
              second += k * k * q;
            }
            if (f.neg.tail) {
              first += tail_first_moment(*f.neg.tail);
              second += tail_second_moment(*f.neg.tail);
            }
            return ExactMoments{f.up_prob - first, f.up_prob + second, f.up_prob + first,
                                f.up_prob};
          },
          [](const RightExponential&) -> ExactMoments {
            throw Error(ErrorCode::NotRational, "right-exponential moments are closed-form reals");
          },
          [](const HeavyTailRightContinuous&) -> ExactMoments {
            throw Error(ErrorCode::NotRational, "heavy-tail moments are irrational");
          },
      },
      spec.family());
}

// ---------------------------------------------------------------------------
// Sampler
// ---------------------------------------------------------------------------

namespace {

std::vector<std::uint32_t> build_guide(const std::vector<double>& cdf) {
  const std::size_t g = std::max<std::size_t>(cdf.size(), 1);
  std::vector<std::uint32_t> guide(g);
  std::size_t i = 0;
  for (std::size_t j = 0; j < g; ++j) {
    const double level = static_cast<double>(j) / static_cast<double>(g);
    while (i + 1 < cdf.size() && cdf[i] < level) ++i;
    guide[j] = static_cast<std::uint32_t>(i);
  }
  return guide;
}

}  // namespace

IncrementSampler::IncrementSampler(const IncrementSpec& spec) : kind_(Kind::Lattice) {
  std::visit(
      Overloaded{
          [&](const SimpleWalk&) { kind_ = Kind::Simple; },
          [&](const LazySimpleWalk& f) {
            kind_ = Kind::Lazy;
            stay_ = f.stay_prob.get_d();
          },
          [&](const RightExponential& f) {
            kind_ = Kind::RightExponential;
            up_ = f.pos_prob;
            rate_ = f.rate;
            std::visit(Overloaded{[&](const NegExponential& e) { neg_value_ = e.rate; },
                                  [&](const NegPoint& p) {
                                    neg_point_ = true;
                                    neg_value_ = p.value;
                                  }},
                       f.neg);
          },
          [&](const RightContinuousLattice& f) {
            up_ = f.up_prob.get_d();
            const Rational neg_total = 1 - f.up_prob;
            Rational head_total = 0;
            if (!f.neg.head.empty()) {
              head_first_ = f.neg.head.begin()->first;
              const long last = f.neg.head.rbegin()->first;
              Rational acc = 0;
              for (long k = head_first_; k <= last; ++k) {
                if (auto it = f.neg.head.find(k); it != f.neg.head.end()) acc += it->second;
                head_cdf_.push_back(Rational(acc / neg_total).get_d());
              }
              head_total = acc;
            }
            head_mass_ = Rational(head_total / neg_total).get_d();
            if (f.neg.tail && f.neg.tail->coef > 0) {
              geometric_tail_ = true;
              tail_first_ = f.neg.tail->first;
              log_ratio_ = std::log(f.neg.tail->ratio.get_d());
            } else {
              head_mass_ = 1.0;  // guard against rounding in the last cdf entry
              if (!head_cdf_.empty()) head_cdf_.back() = 1.0;
            }
            guide_ = build_guide(head_cdf_);
          },
          [&](const HeavyTailRightContinuous& f) {
            const auto [p, c] = spec.heavy_tail_constants();
            up_ = p;
            power_tail_ = true;
            alpha_ = f.alpha;
            zeta_k0_ = hurwitz_zeta(f.alpha + 1.0L, static_cast<long double>(f.k0));
            constexpr long kTable = 4096;
            head_first_ = f.k0;
            long double acc = 0.0L;
            for (long k = f.k0; k < f.k0 + kTable; ++k) {
              acc += std::pow(static_cast<long double>(k), -f.alpha - 1.0L) / zeta_k0_;
              head_cdf_.push_back(static_cast<double>(acc));
            }
            head_mass_ = head_cdf_.back();
            tail_first_ = f.k0 + kTable;
            guide_ = build_guide(head_cdf_);
          },
      },
      spec.family());
}

long IncrementSampler::negative_magnitude(double v) const {
  if (v < head_mass_ && !head_cdf_.empty()) {
    std::size_t i = guide_[static_cast<std::size_t>(v * static_cast<double>(guide_.size()))];
    while (head_cdf_[i] < v) ++i;  // v < head_mass_ = head_cdf_.back()
    return head_first_ + static_cast<long>(i);
  }
  if (geometric_tail_) {
    double w = (v - head_mass_) / (1.0 - head_mass_);
    w = std::clamp(1.0 - w, 1e-300, 1.0);  // P(j >= m) = ratio^m
    return tail_first_ + static_cast<long>(std::floor(std::log(w) / log_ratio_));
  }
  if (power_tail_) return power_tail_magnitude(v);
  return head_first_ + static_cast<long>(head_cdf_.size()) - 1;
}

long IncrementSampler::power_tail_magnitude(double v) const {
  // Smallest k with P(K > k) <= 1 - v, where P(K >= k) = zeta(alpha+1, k) / zeta(alpha+1, k0).
  const long double w = 1.0L - static_cast<long double>(v);
  const auto survival = [&](long k) {
    return hurwitz_zeta(alpha_ + 1.0L, static_cast<long double>(k)) / zeta_k0_;
  };
  const long double guess = std::pow(alpha_ * zeta_k0_ * w, -1.0L / alpha_);
  long k = std::max(tail_first_, static_cast<long>(guess) - 1);
  while (survival(k + 1) > w) ++k;
  while (k > tail_first_ && survival(k) <= w) --k;
  return k;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string serialize(const IncrementSpec& spec) {
  std::ostringstream os;
  os << "family = " << spec.family_name() << "\n";
  std::visit(
      Overloaded{
          [&](const SimpleWalk&) {},
          [&](const LazySimpleWalk& f) { os << "stay_prob = " << to_fraction_string(f.stay_prob) << "\n"; },
          [&](const RightContinuousLattice& f) {
            os << "up_prob = " << to_fraction_string(f.up_prob) << "\n";
            if (!f.neg.head.empty()) {
              os << "neg_head =";
              bool first = true;
              for (const auto& [k, q] : f.neg.head) {
                os << (first ? " " : ", ") << k << ":" << to_fraction_string(q);
                first = false;
              }
              os << "\n";
            }
            if (const auto& t = f.neg.tail)
              os << "neg_tail = " << t->first << " " << to_fraction_string(t->coef) << " "
                 << to_fraction_string(t->ratio) << "\n";
          },
          [&](const RightExponential& f) {
            os << "pos_prob = " << format_double(f.pos_prob) << "\n";
            os << "rate = " << format_double(f.rate) << "\n";
            std::visit(Overloaded{[&](const NegExponential& e) {
                                    os << "neg_law = exponential " << format_double(e.rate) << "\n";
                                  },
                                  [&](const NegPoint& p) {
                                    os << "neg_law = point " << format_double(p.value) << "\n";
                                  }},
                       f.neg);
          },
          [&](const HeavyTailRightContinuous& f) {
            os << "alpha = " << format_double(f.alpha) << "\n";
            os << "k0 = " << f.k0 << "\n";
          },
      },
      spec.family());
  return os.str();
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& text) {
  double x = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw Error(ErrorCode::ConfigError, "key '" + key + "': not a number: '" + text + "'");
  return x;
}

long parse_long(const std::string& key, const std::string& text) {
  long x = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw Error(ErrorCode::ConfigError, "key '" + key + "': not an integer: '" + text + "'");
  return x;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

}  // namespace

IncrementSpec parse_spec(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream is{std::string(text)};
  int lineno = 0;
  for (std::string line; std::getline(is, line);) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!kv.emplace(key, value).second)
      throw Error(ErrorCode::ConfigError, "duplicate key '" + key + "'");
  }
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto require = [&](const std::string& key) {
    auto v = take(key);
    if (!v) throw Error(ErrorCode::ConfigError, "missing key '" + key + "'");
    return *v;
  };

  const std::string family = require("family");
  Family f;
  if (family == "simple") {
    f = SimpleWalk{};
  } else if (family == "lazy") {
    f = LazySimpleWalk{parse_rational(require("stay_prob"))};
  } else if (family == "right_continuous") {
    RightContinuousLattice rc;
    rc.up_prob = parse_rational(require("up_prob"));
    if (auto head = take("neg_head")) {
      std::string entries = *head;
      std::replace(entries.begin(), entries.end(), ',', ' ');
      for (const auto& item : split_ws(entries)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
          throw Error(ErrorCode::ConfigError, "neg_head entries are k:mass, got '" + item + "'");
        const long k = parse_long("neg_head", item.substr(0, colon));
        if (!rc.neg.head.emplace(k, parse_rational(item.substr(colon + 1))).second)
          throw Error(ErrorCode::ConfigError, "neg_head repeats magnitude " + std::to_string(k));
      }
    }
    if (auto tail = take("neg_tail")) {
      const auto parts = split_ws(*tail);
      if (parts.size() != 3)
        throw Error(ErrorCode::ConfigError, "neg_tail expects 'first coef ratio'");
      rc.neg.tail = NegativePmf::GeometricTail{parse_long("neg_tail", parts[0]),
                                               parse_rational(parts[1]), parse_rational(parts[2])};
    }
    f = std::move(rc);
  } else if (family == "right_exponential") {
    RightExponential re;
    re.pos_prob = parse_double("pos_prob", require("pos_prob"));
    re.rate = parse_double("rate", require("rate"));
    const auto parts = split_ws(require("neg_law"));
    if (parts.size() != 2) throw Error(ErrorCode::ConfigError, "neg_law expects 'kind value'");
    if (parts[0] == "exponential")
      re.neg = NegExponential{parse_double("neg_law", parts[1])};
    else if (parts[0] == "point")
      re.neg = NegPoint{parse_double("neg_law", parts[1])};
    else
      throw Error(ErrorCode::ConfigError, "unknown neg_law '" + parts[0] + "'");
    f = re;
  } else if (family == "heavy_tail") {
    HeavyTailRightContinuous h;
    h.alpha = parse_double("alpha", require("alpha"));
    if (auto k0 = take("k0")) h.k0 = parse_long("k0", *k0);
    f = h;
  } else {
    throw Error(ErrorCode::ConfigError, "unknown family '" + family + "'");
  }
  if (!kv.empty())
    throw Error(ErrorCode::ConfigError,
                "unknown key '" + kv.begin()->first + "' for family " + family);
  return IncrementSpec(std::move(f));
}

IncrementSpec preset(std::string_view name) {
  const std::string s(name);
  const auto colon = s.find(':');
  const std::string base = s.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
  if (base == "simple" && arg.empty()) return IncrementSpec::simple();
  if (base == "lazy") return IncrementSpec::lazy(arg.empty() ? Rational(1, 2) : parse_rational(arg));
  if (base == "geometric" && arg.empty()) return IncrementSpec::geometric();
  if (base == "laplace") return IncrementSpec::laplace(arg.empty() ? 1.0 : parse_double("laplace", arg));
  if (base == "heavy") {
    if (arg.empty()) return IncrementSpec::heavy_tail(1.5);
    const auto c2 = arg.find(':');
    if (c2 == std::string::npos) return IncrementSpec::heavy_tail(parse_double("heavy", arg));
    return IncrementSpec::heavy_tail(parse_double("heavy", arg.substr(0, c2)),
                                     parse_long("heavy", arg.substr(c2 + 1)));
  }
  throw Error(ErrorCode::ConfigError, "unknown family preset '" + s + "'");
}

}  // namespace perslab
