#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "wavestruct/scenarios.hpp"

using namespace wavestruct;
using namespace wavestruct::scenarios;

namespace {

MaterialParams disk_material() { return {9.0, 15.0, 1.5, 1.0, std::sqrt(5.0)}; }

PlaneWave disk_plane() {
  PlaneWave p;
  p.material = disk_material();
  p.direction = Vec2(std::sqrt(0.5), std::sqrt(0.5));
  p.omega = 3.0;
  p.t0 = 1.0;
  p.x_ref = -p.direction;
  return p;
}

std::string csv_of(const ConvergenceReport& r) {
  std::ostringstream os;
  write_report_csv(os, r);
  return os.str();
}

ScenarioConfig tiny_disk() {
  auto c = disk_study(cq::Scheme::TR);
  c.final_time = 2.0;
  c.ladder = {{16, 16}, {32, 32}};
  c.sample_count = 5;
  c.exterior_radius = 2.5;
  c.interior_radius = 0.5;
  return c;
}

}  // namespace

TEST_CASE("smooth Heaviside") {
  CHECK(smooth_heaviside(-1.0, 0.5) == 0.0);
  CHECK(smooth_heaviside(1.0, 0.5) == 1.0);
  CHECK(smooth_heaviside(0.25, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  for (double t : {0.05, 0.2, 0.4}) {
    CHECK(smooth_heaviside(t, 0.5) + smooth_heaviside(0.5 - t, 0.5) ==
          doctest::Approx(1.0).epsilon(1e-14));
    const double h = 1e-6;
    const double fd = (smooth_heaviside(t + h, 0.5) - smooth_heaviside(t - h, 0.5)) / (2 * h);
    CHECK(smooth_heaviside_derivative(t, 0.5) == doctest::Approx(fd).epsilon(1e-7));
  }
  // four vanishing derivatives at the ends: H(t) = O(t⁵)
  CHECK(smooth_heaviside(1e-2, 1.0) < 1.3e-8);
  CHECK(1.0 - smooth_heaviside(1.0 - 1e-2, 1.0) < 1.3e-8);
  CHECK_THROWS_AS(smooth_heaviside(0.1, 0.0), ParameterError);
}

TEST_CASE("plane pressure wave") {
  const auto mat = disk_material();
  CHECK(mat.pressure_speed() == doctest::Approx(5.0990195).epsilon(1e-7));
  const Vec2 d(std::sqrt(0.5), std::sqrt(0.5));
  const Vec2 x(0.4, -0.1);
  const double arrival = x.dot(d) / mat.pressure_speed();
  CHECK(plane_pwave(x, arrival - 1e-3, mat, d, 3.0).norm() == 0.0);
  const Vec2 u = plane_pwave(x, arrival + 0.7, mat, d, 3.0);
  CHECK(u.norm() > 0.0);
  CHECK(std::abs(u.x() * d.y() - u.y() * d.x()) < 1e-15);
  CHECK_THROWS_AS(plane_pwave(x, 1.0, mat, Vec2(1.0, 1.0), 3.0), ParameterError);
}

TEST_CASE("plane wave solves the elastic wave equation") {
  const auto p = disk_plane();
  const auto& m = p.material;
  const Vec2 x(0.2, 0.3);
  const double t = 0.6, h = 1e-3;
  auto u = [&](double dx, double dy, double dt) { return p.displacement(x + Vec2(dx, dy), t + dt); };
  const Vec2 utt = (u(0, 0, h) - 2 * u(0, 0, 0) + u(0, 0, -h)) / (h * h);
  const Vec2 lap = (u(h, 0, 0) + u(-h, 0, 0) + u(0, h, 0) + u(0, -h, 0) - 4 * u(0, 0, 0)) / (h * h);
  Vec2 gd;
  gd.x() = (u(h, 0, 0).x() - 2 * u(0, 0, 0).x() + u(-h, 0, 0).x()) / (h * h) +
           (u(h, h, 0).y() - u(h, -h, 0).y() - u(-h, h, 0).y() + u(-h, -h, 0).y()) / (4 * h * h);
  gd.y() = (u(0, h, 0).y() - 2 * u(0, 0, 0).y() + u(0, -h, 0).y()) / (h * h) +
           (u(h, h, 0).x() - u(h, -h, 0).x() - u(-h, h, 0).x() + u(-h, -h, 0).x()) / (4 * h * h);
  const Vec2 res = m.rho_solid * utt - m.lame_mu * lap - (m.lame_lambda + m.lame_mu) * gd;
  CHECK(res.norm() < 1e-4 * (m.rho_solid * utt).norm());

  // gradient, velocity and traction against finite differences
  const double e = 1e-6;
  Eigen::Matrix2d g;
  g.col(0) = (p.displacement(x + Vec2(e, 0), t) - p.displacement(x - Vec2(e, 0), t)) / (2 * e);
  g.col(1) = (p.displacement(x + Vec2(0, e), t) - p.displacement(x - Vec2(0, e), t)) / (2 * e);
  CHECK((g - p.gradient(x, t)).norm() < 1e-6 * g.norm());
  const Vec2 v = (p.displacement(x, t + e) - p.displacement(x, t - e)) / (2 * e);
  CHECK((v - p.velocity(x, t)).norm() < 1e-6 * v.norm());
  const Vec2 nu(0.6, 0.8);
  const Eigen::Matrix2d eps = 0.5 * (g + g.transpose());
  const Eigen::Matrix2d sigma =
      2 * m.lame_mu * eps + m.lame_lambda * eps.trace() * Eigen::Matrix2d::Identity();
  CHECK((sigma * nu - p.traction(x, t, nu)).norm() < 1e-6 * (sigma * nu).norm());
}

TEST_CASE("cylindrical wave") {
  CylindricalWave w;
  w.source = Vec2(1.5, 1.5);
  w.sound_speed = 2.0;
  w.signal = {3.0, 0.5};
  const Vec2 x(3.0, 2.5);
  const double r = (x - w.source).norm();
  CHECK(w.value(x, 0.99 * r / w.sound_speed) == 0.0);
  CHECK(std::abs(w.value(x, r / w.sound_speed + 1.0)) > 0.0);
  CHECK_THROWS_AS(w.value(w.source, 1.0), SingularEvaluationError);

  const double t = 2.1, e = 1e-5;
  const double dt = (w.value(x, t + e) - w.value(x, t - e)) / (2 * e);
  CHECK(w.time_derivative(x, t) == doctest::Approx(dt).epsilon(1e-6));
  const Vec2 gx((w.value(x + Vec2(e, 0), t) - w.value(x - Vec2(e, 0), t)) / (2 * e),
                (w.value(x + Vec2(0, e), t) - w.value(x - Vec2(0, e), t)) / (2 * e));
  CHECK((w.gradient(x, t) - gx).norm() < 1e-6 * gx.norm());

  // wave equation v_tt = c² Δv
  const double h = 1e-3;
  auto v = [&](double dx, double dy, double dtt) { return w.value(x + Vec2(dx, dy), t + dtt); };
  const double vtt = (v(0, 0, h) - 2 * v(0, 0, 0) + v(0, 0, -h)) / (h * h);
  const double lap = (v(h, 0, 0) + v(-h, 0, 0) + v(0, h, 0) + v(0, -h, 0) - 4 * v(0, 0, 0)) / (h * h);
  CHECK(std::abs(vtt - w.sound_speed * w.sound_speed * lap) < 1e-4 * std::abs(vtt));
}

TEST_CASE("cylindrical wave by CQ") {
  CylindricalWave w;
  w.sound_speed = std::sqrt(5.0);
  w.signal = {2.0, 1.0};
  std::vector<Vec2> pts{{2.0, 0.0}, {0.0, 3.0}};
  auto sig = [&](double t) { return w.signal.value(t); };

  const auto grid = cq::TimeGrid::make(3.0, 60);
  const auto zero = cylindrical_wave(pts, grid, w.source, w.sound_speed,
                                     [](double) { return 0.0; }, cq::Scheme::TR);
  CHECK(zero.values.cwiseAbs().maxCoeff() == 0.0);

  // causal: nothing before r/c once the step resolves the arrival; the discrete
  // delay spreads over a few steps, so the leakage shrinks under refinement
  auto leakage = [&](int steps) {
    const auto g = cq::TimeGrid::make(3.0, steps);
    const auto out = cylindrical_wave(pts, g, w.source, w.sound_speed, sig, cq::Scheme::BDF2);
    const double peak = out.values.cwiseAbs().maxCoeff();
    double worst = 0.0;
    for (int n = 0; n <= g.steps; ++n) {
      if (g.time(n) < 2.0 / w.sound_speed) worst = std::max(worst, std::abs(out.values(0, n)) / peak);
    }
    return worst;
  };
  const double coarse = leakage(120), fine = leakage(480);
  CHECK(fine <= 1e-6);
  CHECK(fine < coarse / 16);

  // both schemes converge to the exact integral at second order
  for (auto scheme : {cq::Scheme::BDF2, cq::Scheme::TR}) {
    std::vector<double> err;
    for (int m : {40, 80, 160}) {
      const auto g = cq::TimeGrid::make(3.0, m);
      const auto o = cylindrical_wave(pts, g, w.source, w.sound_speed, sig, scheme);
      double e = 0.0;
      for (size_t i = 0; i < pts.size(); ++i) {
        e = std::max(e, std::abs(o.values(i, m).real() - w.value(pts[i], 3.0)));
      }
      err.push_back(e);
    }
    CAPTURE(cq::to_string(scheme));
    CHECK(std::log2(err[1] / err[2]) == doctest::Approx(2.0).epsilon(0.15));
  }
}

TEST_CASE("transmission data") {
  const auto mesh = circle_boundary(1.0, 24);
  const auto grid = cq::TimeGrid::make(2.0, 40);
  ExactFields zero;
  zero.solid_velocity = [](const Vec2&, double) { return Vec2(0, 0); };
  zero.solid_traction = [](const Vec2&, double, const Vec2&) { return Vec2(0, 0); };
  zero.fluid_velocity = [](const Vec2&, double) { return 0.0; };
  zero.fluid_gradient = [](const Vec2&, double) { return Vec2(0, 0); };
  const auto z = synthesize_transmission_data(zero, mesh, grid, disk_material());
  CHECK(z.lambda0.dofs() == 48);
  CHECK(z.g0.dofs() == 96);
  CHECK(z.stacked().values.cwiseAbs().maxCoeff() == 0.0);

  // plane wave arriving late, source far away: nothing before first arrival
  auto p = disk_plane();
  p.x_ref = -2.0 * p.direction;  // reaches the disk at t = 1/c_L
  CylindricalWave w;
  w.source = Vec2(3.0, 0.0);
  w.sound_speed = std::sqrt(5.0);
  w.signal = {2.0, 1.0};
  const auto d = synthesize_transmission_data(make_exact_fields(p, w), mesh, grid,
                                              disk_material())
                     .stacked();
  const double arrival = std::min(1.0 / p.material.pressure_speed(), 2.0 / w.sound_speed);
  const double peak = d.values.cwiseAbs().maxCoeff();
  CHECK(peak > 0.0);
  for (int n = 0; n <= grid.steps; ++n) {
    if (grid.time(n) < arrival) CHECK(d.values.col(n).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("error metrics") {
  Eigen::VectorXd exact(6);
  exact << 1, 2, -3, 0.5, 0, 1;
  CHECK(relative_max_error(exact, exact, 2) == 0.0);
  CHECK(relative_max_error(exact, Eigen::VectorXd::Zero(6), 2) == doctest::Approx(1.0));
  Eigen::VectorXd noisy = exact;
  noisy(2) += 0.1;
  CHECK(relative_max_error(2 * exact, 2 * noisy, 1) ==
        doctest::Approx(relative_max_error(exact, noisy, 1)));
  CHECK_THROWS_AS(relative_max_error(Eigen::VectorXd::Zero(4), exact.head(4), 1), ParameterError);
  CHECK_THROWS_AS(relative_max_error(exact, exact, 4), ParameterError);
  CHECK(ecr(0.4, 0.1) == doctest::Approx(2.0));
}

TEST_CASE("sample points") {
  const auto a = sample_angles(42, 20);
  CHECK(a == sample_angles(42, 20));
  CHECK(a != sample_angles(43, 20));
  for (double x : a) {
    CHECK(x >= 0.0);
    CHECK(x < 2 * std::numbers::pi);
  }
  const auto pts = circle_points(Vec2(2.0, 1.5), 0.35, a);
  for (const auto& p : pts) CHECK((p - Vec2(2.0, 1.5)).norm() == doctest::Approx(0.35));
}

TEST_CASE("config parsing") {
  const auto disk = disk_study(cq::Scheme::BDF2);
  CHECK(disk.ladder.size() == 4);
  CHECK(disk.material.lame_lambda == 9.0);
  CHECK(disk.final_time == 5.0);
  const auto rect = rectangle_study(cq::Scheme::TR);
  CHECK(rect.formulation == Formulation::Coupled);
  CHECK(rect.ladder.front().n == 2);
  CHECK(rect.ladder.front().m == 20);

  const auto back = parse_config(config_to_json(rect));
  CHECK(config_to_json(back) == config_to_json(rect));

  const auto c = parse_config(R"({"formulation": "bie", "scheme": "bdf2",
      "ladder": [[10, 20], {"n": 20, "m": 40}], "final_time": 2.5,
      "incident": {"direction": [3, 4]}, "sampling": {"seed": 7, "count": 4}})");
  CHECK(c.scheme == cq::Scheme::BDF2);
  CHECK(c.ladder.size() == 2);
  CHECK(c.ladder[1].m == 40);
  CHECK(c.final_time == 2.5);
  CHECK(c.direction.x() == doctest::Approx(0.6));
  CHECK(c.seed == 7);
  CHECK(c.material.lame_mu == 15.0);

  CHECK_THROWS_AS(parse_config("{"), ParameterError);
  CHECK_THROWS_AS(parse_config(R"({"formulation": "fem"})"), ParameterError);
  CHECK_THROWS_AS(parse_config(R"({"ladder": [[0, 10]]})"), ParameterError);
  CHECK_THROWS_AS(parse_config(R"({"final_time": -1})"), ParameterError);
  CHECK_THROWS_AS(parse_config(R"({"scheme": "euler"})"), ParameterError);
  CHECK_THROWS_AS(parse_config(R"({"material": {"lame_mu": -1}})"), ParameterError);
  CHECK_THROWS_AS(parse_config(R"({"formulation": "bie", "geometry": {"type": "rectangle"}})"),
                  ParameterError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ParameterError);
}

TEST_CASE("small disk study is deterministic and well formed") {
  const auto cfg = tiny_disk();
  RunOptions opt;
  opt.keep_signals = true;
  const auto a = run_convergence(cfg, opt);
  const auto b = run_convergence(cfg);
  CHECK(csv_of(a) == csv_of(b));
  REQUIRE(a.rows.size() == 2);
  CHECK(a.rows[0].ok);
  CHECK(a.rows[1].ok);
  CHECK(std::isnan(a.rows[0].ecr_u));
  CHECK(a.rows[1].ecr_u == doctest::Approx(std::log2(a.rows[0].e_u / a.rows[1].e_u)));
  CHECK(a.rows[1].e_u < a.rows[0].e_u);

  const auto text = csv_of(a);
  CHECK(text.rfind("N,M,E^u,ecr_u,E^v,ecr_v,status\n", 0) == 0);
  CHECK(text.find("16,16,") != std::string::npos);
  CHECK(text.find(",,") != std::string::npos);  // blank first-row rates

  REQUIRE(a.signals.size() == 2);
  CHECK(a.signals[0].labels.size() == 3 * 5);
  CHECK(a.signals[0].times.size() == 17);
  std::ostringstream sig, meta;
  write_signals_csv(sig, a);
  write_report_metadata(meta, a);
  CHECK(sig.str().rfind("N,M,step,time,label,computed,exact\n", 0) == 0);
  CHECK(meta.str().find("\"interior_points\"") != std::string::npos);
}

TEST_CASE("failed ladder entries are recorded and the run continues") {
  auto cfg = tiny_disk();
  cfg.interior_radius = 0.7;
  cfg.ladder = {{8, 8}, {24, 16}};  // the octagon passes too close to r = 0.7
  const auto r = run_convergence(cfg);
  REQUIRE(r.rows.size() == 2);
  CHECK_FALSE(r.rows[0].ok);
  CHECK_FALSE(r.rows[0].message.empty());
  CHECK(r.rows[1].ok);
  CHECK(std::isnan(r.rows[1].ecr_u));
  CHECK(csv_of(r).find("failed") != std::string::npos);
}

TEST_CASE("boundary-integral solve is causal and real") {
  // delayed data through the full per-frequency solver
  const auto mat = disk_material();
  const auto mesh = circle_boundary(1.0, 16);
  const auto grid = cq::TimeGrid::make(2.0, 32);
  std::vector<Vec2> in{{0.3, 0.2}}, out{{2.0, 1.0}};
  auto data = cq::TimeSignal::zeros(grid, 6 * mesh.panel_count());
  const int n0 = 12;
  for (int n = n0; n <= grid.steps; ++n) {
    for (int i = 0; i < data.dofs(); ++i) data.values(i, n) = std::sin(0.7 * i + n);
  }
  auto solver = [&](cplx s, const CVector& b) -> CVector {
    const LaplaceFrequency ls(s);
    const auto sys = assemble_bie_system(mesh, ls, mat);
    const auto f = evaluate_fields(mesh, solve_bie_frequency(sys, b), b, ls, mat, in, out);
    CVector r(3);
    r << f.u, f.v;
    return r;
  };
  const auto x = cq::solve(cq::Scheme::BDF2, data, solver);
  const double peak = x.values.cwiseAbs().maxCoeff();
  CHECK(x.values.leftCols(n0).cwiseAbs().maxCoeff() <= 1e-6 * peak);
  CHECK(x.values.imag().cwiseAbs().maxCoeff() <= 1e-10 * peak);
}
