// Reference values computed independently of the library code paths.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

/// Gauss-Legendre nodes/weights on [0, 1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = 0.5 * (1.0 - z);
    w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
}

/// K_nu(z) = ∫_0^∞ exp(-z cosh t) cosh(nu t) dt, Re z > 0, composite Gauss with
/// panels narrow enough to resolve the oscillation.
inline cplx bessel_k_integral(double nu, cplx z) {
  std::vector<double> gx, gw;
  gauss_legendre(20, gx, gw);
  cplx sum = 0.0;
  double t = 0.0;
  for (;;) {
    const double h = std::min(0.25, 1.0 / (std::abs(z) * std::sinh(t) + 1.0));
    for (size_t i = 0; i < gx.size(); ++i) {
      const double ti = t + h * gx[i];
      sum += h * gw[i] * std::exp(-z * std::cosh(ti)) * std::cosh(nu * ti);
    }
    t += h;
    // integrand relative to its size at t = 0
    if (z.real() * (std::cosh(t) - 1.0) - nu * t > 60.0) break;
  }
  return sum;
}

/// I_m(z) from its power series.
inline cplx bessel_i_series(int m, cplx z) {
  cplx term = 1.0;
  for (int k = 1; k <= m; ++k) term *= 0.5 * z / double(k);
  cplx sum = term;
  const cplx q = 0.25 * z * z;
  for (int k = 1; k < 500; ++k) {
    term *= q / (double(k) * double(k + m));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

/// K_m for m >= 0 by upward recurrence from the integral oracle.
inline std::vector<cplx> bessel_k_orders(int mmax, cplx z) {
  std::vector<cplx> k{bessel_k_integral(0.0, z), bessel_k_integral(1.0, z)};
  for (int m = 1; m < mmax; ++m) k.push_back(k[m - 1] + 2.0 * m / z * k[m]);
  k.resize(mmax + 1);
  return k;
}

}  // namespace oracle
