#include "wavestruct/selftest.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "wavestruct/bem.hpp"
#include "wavestruct/cq.hpp"
#include "wavestruct/fem.hpp"
#include "wavestruct/specfun.hpp"

namespace wavestruct::selftest {
namespace {

std::string sci(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

Check wronskian() {
  // I0 K1 + I1 K0 = 1/z
  double worst = 0.0;
  for (cplx z : {cplx(0.3, 0.0), cplx(1.5, 2.0), cplx(3.0, -4.0), cplx(8.0, 1.0)}) {
    const auto k = specfun::bessel_k01(z);
    const cplx w = specfun::bessel_i(0, z) * k.k1 + specfun::bessel_i(1, z) * k.k0;
    worst = std::max(worst, std::abs(w * z - 1.0));
  }
  return {"bessel wronskian", worst < 1e-10, "max rel. error " + sci(worst)};
}

Check cq_exactness() {
  const auto grid = cq::TimeGrid::make(1.0, 200);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto in = cq::TimeSignal::zeros(grid, 1);
  for (int n = 1; n <= grid.steps; ++n) in.values(0, n) = u(rng);
  const double k = grid.step;

  const auto d = cq::convolve(cq::Scheme::BDF2, in, [](cplx s) { return s; });
  const auto q = cq::convolve(cq::Scheme::TR, in, [](cplx s) { return 1.0 / s; });
  double err = 0.0;
  double acc = 0.0;
  for (int n = 0; n <= grid.steps; ++n) {
    const auto x = [&](int m) { return m < 0 ? 0.0 : in.values(0, m).real(); };
    const double bdf = (1.5 * x(n) - 2.0 * x(n - 1) + 0.5 * x(n - 2)) / k;
    if (n > 0) acc += 0.5 * k * (x(n) + x(n - 1));
    err = std::max({err, std::abs(d.values(0, n) - bdf), std::abs(q.values(0, n) - acc)});
  }
  return {"cq exactness", err < 1e-7, "max error " + sci(err)};
}

Check fem_identities() {
  auto [mesh, boundary] = triangulate_rectangle(0.0, 2.0, 0.0, 1.0, 6, 3);
  const ElasticMaterial m{2.0, 3.0, 5.0};
  const auto fem = assemble_elastic_fem(mesh, std::span<const ElasticMaterial>(&m, 1));
  const int n = 2 * mesh.vertex_count();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    CVector z(n);
    for (int i = 0; i < n; ++i) z(i) = cplx(g(rng), g(rng));
    const cplx s(0.1 + std::abs(g(rng)), 3.0 * g(rng));
    const cplx lhs = std::conj(s) * z.dot(fem.at(s) * z);
    const double kz = z.dot(fem.stiffness.cast<cplx>() * z).real();
    const double mz = z.dot(fem.mass.cast<cplx>() * z).real();
    const double rhs = s.real() * (kz + std::norm(s) * mz);
    worst = std::max(worst, std::abs(lhs.real() - rhs) / std::abs(rhs));
  }
  Eigen::MatrixXd rigid(n, 3);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const Vec2& x = mesh.vertices()[v];
    rigid.row(2 * v) << 1.0, 0.0, -x.y();
    rigid.row(2 * v + 1) << 0.0, 1.0, x.x();
  }
  const double kn = Eigen::MatrixXd(fem.stiffness).norm();
  const double rigid_res = (fem.stiffness * rigid).norm() / kn;
  const bool ok = worst < 1e-12 && rigid_res < 1e-12;
  return {"fem energy identity / rigid motions", ok,
          "energy " + sci(worst) + ", rigid " + sci(rigid_res)};
}

Check circle_spectrum() {
  // V e^{imθ} = I_m(s) K_m(s) e^{imθ} on the unit circle.
  const int n = 80;
  const auto mesh = circle_boundary(1.0, n);
  const cplx s(2.0, 2.0);
  const auto p1 = BemSpace::make(mesh, SpaceKind::P1);
  const auto v = assemble_acoustic_block(OperatorKind::V, mesh, p1, p1, s).matrix;
  const CMatrix mass = mass_matrix(mesh, p1, p1);
  const auto k = specfun::bessel_k01(s);
  std::vector<cplx> km{k.k0, k.k1};
  for (int m = 1; m < 3; ++m) km.push_back(km[m - 1] + 2.0 * m / s * km[m]);
  double worst = 0.0;
  for (int m = 0; m <= 3; ++m) {
    CVector c(n);
    for (int j = 0; j < n; ++j) c(j) = std::polar(1.0, 2.0 * std::numbers::pi * m * j / n);
    const cplx eig = c.dot(v * c) / c.dot(mass * c);
    const cplx exact = specfun::bessel_i(m, s) * km[m];
    worst = std::max(worst, std::abs(eig - exact) / std::abs(exact));
  }
  return {"circle single-layer spectrum", worst < 1e-2, "max rel. error " + sci(worst)};
}

}  // namespace

std::vector<Check> run_all() {
  std::vector<Check> out;
  for (auto f : {wronskian, cq_exactness, fem_identities, circle_spectrum}) {
    try {
      out.push_back(f());
    } catch (const std::exception& e) {
      out.push_back({"(exception)", false, e.what()});
    }
  }
  return out;
}

}  // namespace wavestruct::selftest
