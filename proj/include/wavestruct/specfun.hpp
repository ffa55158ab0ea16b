#pragma once

#include <complex>
#include <stdexcept>

namespace wavestruct::specfun {

using cplx = std::complex<double>;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// K0 and K1 at one argument, plus K1(z) - 1/z evaluated without cancellation.
/// The elastodynamic kernel combines shear and pressure parts whose 1/z poles
/// cancel analytically, so it needs the regular part directly.
struct BesselK01 {
  cplx k0;
  cplx k1;
  cplx k1_regular;  // K1(z) - 1/z
};

/// Modified Bessel functions of the second kind, orders 0 and 1, for Re z > 0.
///
/// Ascending series (with the logarithmic term) for |z| <= 2 and the
/// Steed/Temme continued fraction for larger arguments. Arguments with
/// Re z beyond the double underflow threshold return exact zeros for K0, K1.
BesselK01 bessel_k01(cplx z);

/// K_order(z), order in {0, 1}. Throws DomainError for Re z <= 0 or non-finite z.
cplx bessel_k(int order, cplx z);

/// Modified Bessel function of the first kind, order in [0, 64]. Power series for
/// |z| <= 8, Miller backward recurrence beyond.
cplx bessel_i(int order, cplx z);

/// Radius below which bessel_k01 uses the power series.
inline constexpr double kSeriesRadius = 2.0;

}  // namespace wavestruct::specfun
