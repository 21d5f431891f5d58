#pragma once

namespace perslab {

/// Hurwitz zeta sum_{n>=0} (q+n)^(-s) for s > 1, q > 0 (Euler-Maclaurin).
long double hurwitz_zeta(long double s, long double q);

/// Asymptotic Kolmogorov survival function Q(x) = 2 sum (-1)^(k-1) exp(-2 k^2 x^2).
double kolmogorov_survival(double x);

}  // namespace perslab
