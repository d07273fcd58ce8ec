#pragma once

// Test-side reference computations, written independently of the library code
// they check. Romberg integration instead of the library's adaptive Simpson,
// plain bisection instead of the library's Newton inversion.

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

// Romberg integration (trapezoid + Richardson), tol on the extrapolated tail.
inline double quad(const std::function<double(double)>& f, double a, double b,
                   double tol = 1e-12) {
  if (a == b) return 0.0;
  constexpr int kMax = 24;
  std::array<double, kMax> prev{}, cur{};
  double h = b - a;
  prev[0] = 0.5 * h * (f(a) + f(b));
  long n = 1;
  for (int i = 1; i < kMax; ++i) {
    h *= 0.5;
    double sum = 0.0;
    for (long k = 0; k < n; ++k) sum += f(a + (2 * k + 1) * h);
    cur[0] = 0.5 * prev[0] + h * sum;
    double factor = 4.0;
    for (int j = 1; j <= i; ++j) {
      cur[j] = cur[j - 1] + (cur[j - 1] - prev[j - 1]) / (factor - 1.0);
      factor *= 4.0;
    }
    if (i > 3 && std::abs(cur[i] - prev[i - 1]) < tol * (1.0 + std::abs(cur[i])))
      return cur[i];
    n *= 2;
    prev = cur;
  }
  return cur[kMax - 1];
}

// Bisection for a strictly monotone f; returns x with f(x) = target.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double target, double xtol = 1e-13) {
  double flo = f(lo) - target, fhi = f(hi) - target;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw std::invalid_argument("oracle::bisect: target not bracketed");
  for (int i = 0; i < 200 && hi - lo > xtol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid) - target;
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// chi / r / d(r)/dy from the pinned cutoff formula, written out directly.
inline double chi(double y, double eps) {
  const double z = eps / 3.0;
  const double t1 = (y - z) / z, t2 = (2.0 * z - y) / z;
  const double p1 = t1 > 0.0 ? std::exp(-1.0 / t1) : 0.0;
  const double p2 = t2 > 0.0 ? std::exp(-1.0 / t2) : 0.0;
  if (p1 + p2 == 0.0) return y <= z ? 1.0 : 0.0;
  return p2 / (p1 + p2);
}

inline double r_weight(double y, double eps) {
  const double c = chi(y, eps);
  return c * y + 1.0 - c;
}

inline double dchi_dy(double y, double eps) {
  const double z = eps / 3.0;
  if (y <= z || y >= 2.0 * z) return 0.0;
  const double t1 = (y - z) / z, t2 = (2.0 * z - y) / z;
  const double p1 = std::exp(-1.0 / t1), p2 = std::exp(-1.0 / t2);
  const double dp1 = p1 / (t1 * t1) / z;          // d(phi(t1))/dy
  const double dp2 = -p2 / (t2 * t2) / z;         // d(phi(t2))/dy
  const double den = p1 + p2;
  return (dp2 * den - p2 * (dp1 + dp2)) / (den * den);
}

inline double dr_dy(double y, double eps) {
  return chi(y, eps) + dchi_dy(y, eps) * (y - 1.0);
}

}  // namespace oracle
