#include "perslab/walk.hpp"

#include <algorithm>
#include <ostream>

namespace perslab {

std::string_view convention_name(CrossingConvention c) {
  switch (c) {
    case CrossingConvention::WeakUp: return "weak-up";
    case CrossingConvention::StrictUp: return "strict-up";
    case CrossingConvention::LastNegative: return "last-negative";
    case CrossingConvention::LeaveZero: return "leave-zero";
  }
  return "?";
}

CrossingConvention parse_convention(std::string_view name) {
  for (auto c : {CrossingConvention::WeakUp, CrossingConvention::StrictUp,
                 CrossingConvention::LastNegative, CrossingConvention::LeaveZero})
    if (convention_name(c) == name) return c;
  throw Error(ErrorCode::ConfigError, "unknown crossing convention '" + std::string(name) + "'");
}

Trajectory Trajectory::from_increments(std::span<const double> steps) {
  Trajectory t;
  double s = 0.0, a = 0.0;
  for (double x : steps) {
    s += x;
    a += s;
    t.s.push_back(s);
    t.a.push_back(a);
  }
  return t;
}

Trajectory Trajectory::from_walk(std::span<const double> walk) {
  Trajectory t;
  t.s.assign(walk.begin(), walk.end());
  double a = 0.0;
  for (double s : walk) t.a.push_back(a += s);
  return t;
}

void write_trajectory(std::ostream& os, const Trajectory& t) {
  os << "k S_k A_k\n";
  for (std::size_t k = 0; k < t.n(); ++k) os << k + 1 << ' ' << t.s[k] << ' ' << t.a[k] << '\n';
}

namespace {

bool starts_cycle(CrossingConvention c, double next) {
  switch (c) {
    case CrossingConvention::StrictUp: return next >= 0.0;
    case CrossingConvention::LeaveZero: return next != 0.0;
    default: return next > 0.0;
  }
}

}  // namespace

CycleRecord decompose(const Trajectory& t, CrossingConvention convention) {
  CycleRecord rec;
  rec.convention = convention;
  const std::size_t n = t.n();
  const auto S = [&](std::size_t k) { return k == 0 ? 0.0 : t.s[k - 1]; };
  const auto A = [&](std::size_t k) { return k == 0 ? 0.0 : t.a[k - 1]; };

  std::size_t start = 0;
  while (start < n && !starts_cycle(convention, S(start + 1))) ++start;
  if (start >= n) return rec;
  rec.theta_big.push_back(start);
  rec.psi_big.push_back(A(start));

  std::size_t last_neg = 0;  // absolute index of the last S < 0 in the open cycle
  bool pending = false;
  for (std::size_t m = start + 1; m + 1 <= n; ++m) {
    const double s = S(m), next = S(m + 1);
    if (s < 0.0) last_neg = m;
    bool cut = false;
    std::size_t at = m;
    switch (convention) {
      case CrossingConvention::WeakUp: cut = s <= 0.0 && next > 0.0; break;
      case CrossingConvention::StrictUp: cut = s < 0.0 && next >= 0.0; break;
      case CrossingConvention::LeaveZero: cut = s == 0.0 && next != 0.0; break;
      case CrossingConvention::LastNegative: {
        const bool after_negative = s < 0.0 || pending;
        cut = after_negative && next > 0.0;
        pending = after_negative && next == 0.0;
        at = last_neg;
        break;
      }
    }
    if (!cut) continue;
    const std::size_t prev = rec.theta_big.back();
    rec.theta_big.push_back(at);
    rec.psi_big.push_back(A(at));
    rec.theta.push_back(at - prev);
    rec.psi.push_back(A(at) - A(prev));
    std::size_t hat = 0, plus = at - prev;
    for (std::size_t j = at; j > prev; --j)
      if (S(j) < 0.0) {
        hat = j - prev;
        break;
      }
    for (std::size_t j = prev + 1; j < at; ++j)
      if (S(j) >= 0.0 && S(j + 1) < 0.0) {
        plus = j - prev;
        break;
      }
    rec.theta_hat.push_back(hat);
    rec.theta_plus.push_back(plus);
    rec.theta_minus.push_back(at - prev - plus);
    last_neg = 0;
    pending = false;
  }
  rec.eta = rec.theta.size();
  return rec;
}

std::size_t cycles_up_to(const CycleRecord& rec, std::size_t horizon) {
  std::size_t k = 0;
  while (k < rec.theta.size() && rec.theta_big[k + 1] <= horizon) ++k;
  return k;
}

bool persistence_indicator(const Trajectory& t, std::size_t n) {
  n = std::min(n, t.n());
  return std::all_of(t.a.begin(), t.a.begin() + static_cast<long>(n),
                     [](double a) { return a > 0.0; });
}

bool reduction_indicator(const Trajectory& t, std::size_t n) {
  n = std::min(n, t.n());
  if (n == 0) return true;
  if (!(t.a[0] > 0.0) || !(t.a[n - 1] > 0.0)) return false;
  const CycleRecord rec = decompose(t, CrossingConvention::WeakUp);
  const std::size_t eta = cycles_up_to(rec, n);
  for (std::size_t k = 1; k <= eta; ++k)
    if (!(rec.psi_big[k] > 0.0)) return false;
  return true;
}

}  // namespace perslab
