#include "wavestruct/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wavestruct/quadrature.hpp"
#include "wavestruct/specfun.hpp"

namespace wavestruct::scenarios {

namespace {
constexpr double kInv2Pi = 0.5 / std::numbers::pi;
constexpr int kCylinderPoints = 64;
}  // namespace

double smooth_heaviside(double t, double t0) {
  if (!(t0 > 0.0)) throw ParameterError("smooth_heaviside: t0 must be positive");
  if (t <= 0.0) return 0.0;
  if (t >= t0) return 1.0;
  const double x = t / t0;
  const double x5 = x * x * x * x * x;
  return x5 * (126.0 + x * (-420.0 + x * (540.0 + x * (-315.0 + x * 70.0))));
}

double smooth_heaviside_derivative(double t, double t0) {
  if (!(t0 > 0.0)) throw ParameterError("smooth_heaviside: t0 must be positive");
  if (t <= 0.0 || t >= t0) return 0.0;
  const double x = t / t0;
  const double y = x * (1.0 - x);
  return 630.0 * y * y * y * y / t0;
}

double WindowedSine::value(double t) const {
  return smooth_heaviside(t, t0) * std::sin(omega * t);
}

double WindowedSine::derivative(double t) const {
  return smooth_heaviside_derivative(t, t0) * std::sin(omega * t) +
         smooth_heaviside(t, t0) * omega * std::cos(omega * t);
}

// ---------------------------------------------------------------------------

double PlaneWave::phase(const Vec2& x, double t) const {
  return material.pressure_speed() * t - (x - x_ref).dot(direction);
}

double PlaneWave::psi(double xi) const {
  return smooth_heaviside(xi / material.pressure_speed(), t0) * std::sin(omega * xi);
}

double PlaneWave::psi_derivative(double xi) const {
  const double cl = material.pressure_speed();
  return smooth_heaviside_derivative(xi / cl, t0) / cl * std::sin(omega * xi) +
         smooth_heaviside(xi / cl, t0) * omega * std::cos(omega * xi);
}

Vec2 PlaneWave::displacement(const Vec2& x, double t) const {
  return psi(phase(x, t)) * direction;
}

Vec2 PlaneWave::velocity(const Vec2& x, double t) const {
  return material.pressure_speed() * psi_derivative(phase(x, t)) * direction;
}

Eigen::Matrix2d PlaneWave::gradient(const Vec2& x, double t) const {
  return -psi_derivative(phase(x, t)) * direction * direction.transpose();
}

Vec2 PlaneWave::traction(const Vec2& x, double t, const Vec2& normal) const {
  const double dpsi = psi_derivative(phase(x, t));
  return -dpsi * (2.0 * material.lame_mu * direction.dot(normal) * direction +
                  material.lame_lambda * normal);
}

Vec2 plane_pwave(const Vec2& x, double t, const MaterialParams& mat, const Vec2& direction,
                 double omega) {
  if (std::abs(direction.norm() - 1.0) > 1e-12) {
    throw ParameterError("plane_pwave: direction must be a unit vector");
  }
  PlaneWave w;
  w.material = mat;
  w.direction = direction;
  w.omega = omega;
  return w.displacement(x, t);
}

// ---------------------------------------------------------------------------

namespace {

// (1/2π) ∫_0^{θmax} f(t - (r/c) cosh θ) w(θ) dθ split where the argument crosses
// the end of the window ramp.
template <class F>
double cylinder_integral(double r, double c, double t, double t0, const F& f) {
  if (!(r > 0.0)) throw SingularEvaluationError("cylindrical wave: point at the source");
  const double ratio = c * t / r;
  if (ratio <= 1.0) return 0.0;
  const double theta_max = std::acosh(ratio);
  std::vector<double> cuts = {0.0};
  const double kink = c * (t - t0) / r;
  if (kink > 1.0) cuts.push_back(std::acosh(kink));
  cuts.push_back(theta_max);
  const auto& rule = quad::gauss(kCylinderPoints);
  double sum = 0.0;
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    for (size_t i = 0; i < rule.x.size(); ++i) {
      const double th = a + (b - a) * rule.x[i];
      sum += (b - a) * rule.w[i] * f(t - (r / c) * std::cosh(th), th);
    }
  }
  return kInv2Pi * sum;
}

}  // namespace

double CylindricalWave::value(const Vec2& x, double t) const {
  return cylinder_integral((x - source).norm(), sound_speed, t, signal.t0,
                           [&](double tau, double) { return signal.value(tau); });
}

double CylindricalWave::time_derivative(const Vec2& x, double t) const {
  return cylinder_integral((x - source).norm(), sound_speed, t, signal.t0,
                           [&](double tau, double) { return signal.derivative(tau); });
}

Vec2 CylindricalWave::gradient(const Vec2& x, double t) const {
  const Vec2 z = x - source;
  const double r = z.norm();
  const double vr = -cylinder_integral(r, sound_speed, t, signal.t0, [&](double tau, double th) {
                      return signal.derivative(tau) * std::cosh(th);
                    }) / sound_speed;
  return vr * z / r;
}

cq::TimeSignal cylindrical_wave(std::span<const Vec2> points, const cq::TimeGrid& grid,
                                const Vec2& source, double sound_speed,
                                const std::function<double(double)>& signal, cq::Scheme scheme) {
  if (!(sound_speed > 0.0)) throw ParameterError("cylindrical_wave: sound speed must be positive");
  const int np = static_cast<int>(points.size());
  std::vector<double> radius(np);
  for (int i = 0; i < np; ++i) {
    radius[i] = (points[i] - source).norm();
    if (!(radius[i] > 0.0)) throw SingularEvaluationError("cylindrical_wave: point at the source");
  }
  cq::TimeSignal input = cq::TimeSignal::zeros(grid, 1);
  for (int n = 0; n <= grid.steps; ++n) input.values(0, n) = signal(grid.time(n));
  cq::TimeSignal out = cq::TimeSignal::zeros(grid, np);
  for (int i = 0; i < np; ++i) {
    const double r = radius[i];
    const auto row = cq::convolve(scheme, input, [&](cplx s) {
      return kInv2Pi * specfun::bessel_k(0, s * r / sound_speed);
    });
    out.values.row(i) = row.values.row(0);
  }
  return out;
}

// ---------------------------------------------------------------------------

ExactFields make_exact_fields(const PlaneWave& u, const CylindricalWave& v) {
  ExactFields f;
  f.solid_velocity = [u](const Vec2& x, double t) { return u.velocity(x, t); };
  f.solid_traction = [u](const Vec2& x, double t, const Vec2& nu) { return u.traction(x, t, nu); };
  f.fluid_velocity = [v](const Vec2& x, double t) { return v.time_derivative(x, t); };
  f.fluid_gradient = [v](const Vec2& x, double t) { return v.gradient(x, t); };
  return f;
}

cq::TimeSignal TransmissionData::stacked() const {
  cq::TimeSignal out{lambda0.grid, CMatrix(lambda0.dofs() + g0.dofs(), lambda0.values.cols())};
  out.values.topRows(lambda0.dofs()) = lambda0.values;
  out.values.bottomRows(g0.dofs()) = g0.values;
  return out;
}

TransmissionData synthesize_transmission_data(const ExactFields& exact,
                                              const BoundaryMesh& boundary,
                                              const cq::TimeGrid& grid,
                                              const MaterialParams& mat) {
  mat.validate();
  const int np = boundary.panel_count();
  TransmissionData d{cq::TimeSignal::zeros(grid, 2 * np), cq::TimeSignal::zeros(grid, 4 * np)};
  for (int n = 0; n <= grid.steps; ++n) {
    const double t = grid.time(n);
    for (int p = 0; p < np; ++p) {
      const Vec2& nu = boundary.normal(p);
      for (int e = 0; e < 2; ++e) {
        const Vec2& x = boundary.nodes()[boundary.panels()[p][e]];
        d.lambda0.values(2 * p + e, n) =
            -exact.solid_velocity(x, t).dot(nu) - exact.fluid_gradient(x, t).dot(nu);
        const Vec2 g = exact.solid_traction(x, t, nu) +
                       mat.rho_fluid * exact.fluid_velocity(x, t) * nu;
        d.g0.values(4 * p + 2 * e, n) = g.x();
        d.g0.values(4 * p + 2 * e + 1, n) = g.y();
      }
    }
  }
  return d;
}

// ---------------------------------------------------------------------------

double relative_max_error(const Eigen::VectorXd& exact, const Eigen::VectorXd& computed,
                          int components) {
  if (exact.size() != computed.size() || components < 1 || exact.size() % components != 0) {
    throw ParameterError("relative_max_error: size mismatch");
  }
  const int n = static_cast<int>(exact.size()) / components;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    num = std::max(num, (exact.segment(i * components, components) -
                         computed.segment(i * components, components))
                            .norm());
    den = std::max(den, exact.segment(i * components, components).norm());
  }
  if (!(den > 0.0)) throw ParameterError("relative_max_error: exact samples are all zero");
  return num / den;
}

double ecr(double previous, double current) { return std::log2(previous / current); }

std::vector<double> sample_angles(std::uint64_t seed, int count) {
  // splitmix64 start, golden-ratio (Kronecker) sequence after it.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  const double start = static_cast<double>(z >> 11) * 0x1.0p-53;
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) {
    double f = start + golden * i;
    f -= std::floor(f);
    out[i] = 2.0 * std::numbers::pi * f;
  }
  return out;
}

std::vector<Vec2> circle_points(const Vec2& center, double radius,
                                std::span<const double> angles) {
  std::vector<Vec2> out;
  out.reserve(angles.size());
  for (double a : angles) out.push_back(center + radius * Vec2(std::cos(a), std::sin(a)));
  return out;
}

}  // namespace wavestruct::scenarios
