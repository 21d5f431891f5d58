#include "perslab/special.hpp"

#include <cmath>

namespace perslab {

long double hurwitz_zeta(long double s, long double q) {
  // B_{2j} / (2j)!
  static constexpr long double kBernoulliOverFactorial[] = {
      1.0L / 12.0L,
      -1.0L / 720.0L,
      1.0L / 30240.0L,
      -1.0L / 1209600.0L,
      1.0L / 47900160.0L,
      -691.0L / 1307674368000.0L,
      1.0L / 74724249600.0L,
      -3617.0L / 10670622842880000.0L,
  };
  constexpr int kDirect = 12;
  long double sum = 0.0L;
  int n = 0;
  for (; q + n < kDirect; ++n) sum += std::pow(q + n, -s);
  const long double x = q + n;
  sum += std::pow(x, 1.0L - s) / (s - 1.0L) + 0.5L * std::pow(x, -s);
  long double rising = s;  // s (s+1) ... (s+2j-2)
  long double xpow = std::pow(x, -s - 1.0L);
  for (int j = 0; j < 8; ++j) {
    sum += kBernoulliOverFactorial[j] * rising * xpow;
    rising *= (s + 2 * j + 1) * (s + 2 * j + 2);
    xpow /= x * x;
  }
  return sum;
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;  // Q(0.2) = 1 - 1e-10
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-17) break;
  }
  const double q = 2.0 * sum;
  return q < 0.0 ? 0.0 : (q > 1.0 ? 1.0 : q);
}

}  // namespace perslab
