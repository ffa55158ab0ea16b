#include <cmath>
#include <numbers>

#include "wavestruct/bem.hpp"
#include "wavestruct/specfun.hpp"

namespace wavestruct {

namespace {
constexpr double kInv2Pi = 0.5 / std::numbers::pi;
}

LaplaceFrequency::LaplaceFrequency(cplx value) : value_(value) {
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag()) || !(value.real() > 0.0)) {
    throw ParameterError("LaplaceFrequency: Re s must be positive and finite");
  }
}

void MaterialParams::validate() const {
  if (!(lame_mu > 0.0)) throw ParameterError("MaterialParams: lame_mu must be positive");
  if (!(lame_lambda + lame_mu > 0.0)) {
    throw ParameterError("MaterialParams: lame_lambda + lame_mu must be positive");
  }
  if (!(rho_solid > 0.0)) throw ParameterError("MaterialParams: rho_solid must be positive");
  if (!(rho_fluid >= 0.0)) throw ParameterError("MaterialParams: rho_fluid must be >= 0");
  if (!(sound_speed > 0.0)) throw ParameterError("MaterialParams: sound_speed must be positive");
}

double MaterialParams::pressure_speed() const {
  return std::sqrt((lame_lambda + 2.0 * lame_mu) / rho_solid);
}

double MaterialParams::shear_speed() const { return std::sqrt(lame_mu / rho_solid); }

namespace detail {

AcousticRadial acoustic_radial(cplx k, double r) {
  const auto kb = specfun::bessel_k01(k * r);
  return {kInv2Pi * kb.k0, -kInv2Pi * k * kb.k1};
}

ElasticRadial elastic_radial(cplx kp, cplx ks, double mu, double lambda_2mu, double r) {
  const cplx zs = ks * r;
  const cplx zp = kp * r;
  const auto bs = specfun::bessel_k01(zs);
  const auto bp = specfun::bessel_k01(zp);
  const cplx k2s = bs.k0 + 2.0 * bs.k1_regular / zs;  // K2 - 2/z^2
  const cplx k2p = bp.k0 + 2.0 * bp.k1_regular / zp;
  ElasticRadial e;
  e.a = kInv2Pi * (bs.k0 / mu + bs.k1_regular / (zs * mu) - bp.k1_regular / (zp * lambda_2mu));
  e.b = -kInv2Pi * (k2s / mu - k2p / lambda_2mu);
  e.gp = kInv2Pi * bp.k0;
  e.dgp = -kInv2Pi * kp * bp.k1;
  e.gs = kInv2Pi * bs.k0;
  e.dgs = -kInv2Pi * ks * bs.k1;
  return e;
}

}  // namespace detail

cplx acoustic_fundamental(const Vec2& x, const Vec2& y, cplx s_over_c) {
  const double r = (x - y).norm();
  if (!(r > 0.0)) throw SingularEvaluationError("acoustic_fundamental: coincident points");
  return detail::acoustic_radial(s_over_c, r).g;
}

Mat2c elastic_fundamental(const Vec2& x, const Vec2& y, LaplaceFrequency s,
                          const MaterialParams& mat) {
  const Vec2 z = x - y;
  const double r = z.norm();
  if (!(r > 0.0)) throw SingularEvaluationError("elastic_fundamental: coincident points");
  const cplx kp = s.value() / mat.pressure_speed();
  const cplx ks = s.value() / mat.shear_speed();
  const auto e = detail::elastic_radial(kp, ks, mat.lame_mu, mat.lame_lambda + 2.0 * mat.lame_mu, r);
  const Vec2 zh = z / r;
  Mat2c out;
  out(0, 0) = e.a + e.b * zh.x() * zh.x();
  out(0, 1) = e.b * zh.x() * zh.y();
  out(1, 0) = out(0, 1);
  out(1, 1) = e.a + e.b * zh.y() * zh.y();
  return out;
}

}  // namespace wavestruct
