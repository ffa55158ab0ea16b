#include "wavestruct/specfun.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace wavestruct::specfun {

namespace {

constexpr double kEps = 1e-17;
constexpr int kMaxIter = 100000;
// exp(-700) is close to the smallest normal double.
constexpr double kUnderflowRe = 700.0;
// Beyond this |z| the power series for I_m loses digits to cancellation.
constexpr double kMillerRadius = 8.0;

void check_argument(cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw DomainError("bessel_k: non-finite argument");
  }
  if (!(z.real() > 0.0)) {
    throw DomainError("bessel_k: argument must satisfy Re z > 0, got Re z = " +
                      std::to_string(z.real()));
  }
}

BesselK01 series(cplx z) {
  const cplx q = 0.25 * z * z;
  const cplx log_half = std::log(0.5 * z);
  // psi(k+1) with psi(1) = -gamma
  double psi_k1 = -std::numbers::egamma;

  cplx term0 = 1.0;       // q^k / (k!)^2
  cplx term1 = 1.0;       // q^k / (k! (k+1)!)
  cplx i0 = 0.0, s0 = 0.0;
  cplx i1_sum = 0.0, s1 = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double psi_k2 = psi_k1 + 1.0 / (k + 1);
    i0 += term0;
    s0 += psi_k1 * term0;
    i1_sum += term1;
    s1 += (psi_k1 + psi_k2) * term1;
    if (std::abs(term0) < kEps * std::abs(i0) && k > 2) break;
    term0 *= q / double((k + 1) * (k + 1));
    term1 *= q / double((k + 1) * (k + 2));
    psi_k1 = psi_k2;
  }
  const cplx i1 = 0.5 * z * i1_sum;
  BesselK01 out;
  out.k0 = -log_half * i0 + s0;
  out.k1_regular = log_half * i1 - 0.25 * z * s1;
  out.k1 = out.k1_regular + 1.0 / z;
  return out;
}

// Steed's continued fraction CF2 with Temme's normalisation, order mu = 0.
BesselK01 continued_fraction(cplx z) {
  cplx b = 2.0 * (1.0 + z);
  cplx d = 1.0 / b;
  cplx h = d;
  cplx delh = d;
  cplx q1 = 0.0;
  cplx q2 = 1.0;
  const double a1 = 0.25;
  cplx q = a1;
  cplx c = a1;
  double a = -a1;
  cplx s = 1.0 + q * delh;
  int i = 1;
  for (; i < kMaxIter; ++i) {
    a -= 2 * i;
    c = -a * c / (i + 1.0);
    const cplx qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const cplx dels = q * delh;
    s += dels;
    if (std::abs(dels) < kEps * std::abs(s)) break;
  }
  if (i == kMaxIter) {
    throw DomainError("bessel_k: continued fraction failed to converge");
  }
  h *= a1;
  BesselK01 out;
  out.k0 = std::sqrt(std::numbers::pi / (2.0 * z)) * std::exp(-z) / s;
  out.k1 = out.k0 * (z + 0.5 - h) / z;
  out.k1_regular = out.k1 - 1.0 / z;
  return out;
}

// Backward recurrence I_{k-1} = I_{k+1} + (2k/z) I_k from a high start, normalised
// with e^z = I_0 + 2 sum I_k (or the alternating form for e^{-z} when Re z < 0).
cplx miller_i(int order, cplx z) {
  const int start = 2 * ((order + static_cast<int>(std::abs(z)) + 60) / 2);
  const double sign = z.real() >= 0.0 ? 1.0 : -1.0;
  cplx next = 0.0, cur = 1e-300, wanted = 0.0, norm = 0.0;
  for (int k = start; k >= 1; --k) {
    const cplx prev = next + (2.0 * k / z) * cur;
    next = cur;
    cur = prev;
    // cur now holds the unnormalised I_{k-1}
    if (k - 1 == order) wanted = cur;
    if (k - 1 > 0) norm += 2.0 * ((k - 1) % 2 == 0 ? 1.0 : sign) * cur;
    if (std::abs(cur) > 1e250) {
      next *= 1e-250;
      cur *= 1e-250;
      wanted *= 1e-250;
      norm *= 1e-250;
    }
  }
  norm += cur;
  return wanted / norm * std::exp(sign * z);
}

}  // namespace

BesselK01 bessel_k01(cplx z) {
  check_argument(z);
  if (z.real() > kUnderflowRe) {
    return {0.0, 0.0, -1.0 / z};
  }
  if (std::abs(z) <= kSeriesRadius) return series(z);
  return continued_fraction(z);
}

cplx bessel_k(int order, cplx z) {
  if (order != 0 && order != 1) {
    throw DomainError("bessel_k: only orders 0 and 1 are supported");
  }
  const BesselK01 k = bessel_k01(z);
  return order == 0 ? k.k0 : k.k1;
}

cplx bessel_i(int order, cplx z) {
  if (order < 0 || order > 64) {
    throw DomainError("bessel_i: order must lie in [0, 64]");
  }
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw DomainError("bessel_i: non-finite argument");
  }
  if (std::abs(z) > kMillerRadius) return miller_i(order, z);
  const cplx half = 0.5 * z;
  cplx lead = 1.0;
  for (int k = 1; k <= order; ++k) lead *= half / double(k);
  const cplx q = half * half;
  cplx term = 1.0, sum = 0.0;
  for (int k = 0; k < 1000; ++k) {
    sum += term;
    if (std::abs(term) < kEps * std::abs(sum) && k > 2) break;
    term *= q / double((k + 1) * (k + 1 + order));
  }
  return lead * sum;
}

}  // namespace wavestruct::specfun
