#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "wavestruct/fem.hpp"
#include "wavestruct/scenarios.hpp"

namespace wavestruct::scenarios {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec2 read_vec2(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 2) {
    throw ParameterError(std::string("config: '") + key + "' must be a two-element array");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json vec2_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void ScenarioConfig::validate() const {
  material.validate();
  if (!(material.rho_fluid > 0.0)) throw ParameterError("config: rho_fluid must be positive");
  if (!(final_time > 0.0)) throw ParameterError("config: final_time must be positive");
  if (ladder.empty()) throw ParameterError("config: ladder is empty");
  for (const auto& e : ladder) {
    if (e.n <= 0 || e.m <= 0) throw ParameterError("config: ladder entries must be positive");
  }
  if (geometry != "disk" && geometry != "rectangle") {
    throw ParameterError("config: geometry must be 'disk' or 'rectangle'");
  }
  if (formulation == Formulation::Coupled && geometry != "rectangle") {
    throw ParameterError("config: the coupled formulation runs on the rectangle geometry");
  }
  if (formulation == Formulation::Bie && geometry != "disk") {
    throw ParameterError("config: the BIE study runs on the disk geometry");
  }
  if (geometry == "disk" && !(radius > 0.0)) throw ParameterError("config: radius must be positive");
  if (geometry == "rectangle" && !(x_lo < x_hi && y_lo < y_hi)) {
    throw ParameterError("config: degenerate rectangle");
  }
  if (!(h0 > 0.0)) throw ParameterError("config: h0 must be positive");
  if (std::abs(direction.norm() - 1.0) > 1e-12) {
    throw ParameterError("config: direction must be a unit vector");
  }
  if (!(window_t0 > 0.0)) throw ParameterError("config: window_t0 must be positive");
  if (sample_count < 1) throw ParameterError("config: sample count must be >= 1");
  if (!(interior_radius > 0.0) || !(exterior_radius > 0.0)) {
    throw ParameterError("config: sampling radii must be positive");
  }
  if (threads < 1) throw ParameterError("config: threads must be >= 1");
}

ScenarioConfig disk_study(cq::Scheme scheme) {
  ScenarioConfig c;
  c.formulation = Formulation::Bie;
  c.scheme = scheme;
  c.geometry = "disk";
  c.radius = 1.0;
  c.material = {9.0, 15.0, 1.5, 1.0, std::sqrt(5.0)};
  c.final_time = 5.0;
  c.ladder = {{40, 80}, {80, 160}, {160, 320}, {320, 640}};
  c.plane_omega = 3.0;
  c.plane_origin = -c.direction;
  c.source = {0.0, 0.0};
  c.source_omega = 2.0;
  c.window_t0 = 1.0;
  c.sample_center = {0.0, 0.0};
  c.interior_radius = 0.7;
  c.exterior_radius = 2.0;
  c.output = std::string("disk_") + cq::to_string(scheme) + ".csv";
  return c;
}

ScenarioConfig rectangle_study(cq::Scheme scheme) {
  ScenarioConfig c;
  c.formulation = Formulation::Coupled;
  c.scheme = scheme;
  c.geometry = "rectangle";
  c.x_lo = 1.0;
  c.x_hi = 3.0;
  c.y_lo = 1.0;
  c.y_hi = 2.0;
  c.h0 = 0.52;
  c.material = {2.0, 3.0, 5.0, 1.0, 1.0};
  c.final_time = 1.5;
  c.ladder = {{2, 20}, {3, 40}, {4, 80}, {5, 160}};
  c.plane_omega = 2.0;
  c.plane_origin = {1.0, 1.0};
  c.source = {1.5, 1.5};
  c.source_omega = 3.0;
  c.window_t0 = 0.5;
  c.sample_center = {2.0, 1.5};
  c.interior_radius = 0.35;
  c.exterior_radius = 1.3;
  c.output = std::string("rectangle_") + cq::to_string(scheme) + ".csv";
  return c;
}

ScenarioConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config: invalid JSON: ") + e.what());
  }
  try {
    const std::string form = j.value("formulation", std::string("bie"));
    const cq::Scheme scheme = cq::parse_scheme(j.value("scheme", std::string("tr")));
    ScenarioConfig c;
    if (form == "bie") {
      c = disk_study(scheme);
    } else if (form == "coupled") {
      c = rectangle_study(scheme);
    } else {
      throw ParameterError("config: formulation must be 'bie' or 'coupled'");
    }
    if (j.contains("geometry")) {
      const auto& g = j.at("geometry");
      read_opt(g, "type", c.geometry);
      read_opt(g, "radius", c.radius);
      read_opt(g, "x_lo", c.x_lo);
      read_opt(g, "x_hi", c.x_hi);
      read_opt(g, "y_lo", c.y_lo);
      read_opt(g, "y_hi", c.y_hi);
      read_opt(g, "h0", c.h0);
    }
    if (j.contains("material")) {
      const auto& m = j.at("material");
      read_opt(m, "lame_lambda", c.material.lame_lambda);
      read_opt(m, "lame_mu", c.material.lame_mu);
      read_opt(m, "rho_solid", c.material.rho_solid);
      read_opt(m, "rho_fluid", c.material.rho_fluid);
      read_opt(m, "sound_speed", c.material.sound_speed);
    }
    read_opt(j, "final_time", c.final_time);
    if (j.contains("ladder")) {
      c.ladder.clear();
      for (const auto& e : j.at("ladder")) {
        if (e.is_array() && e.size() == 2) {
          c.ladder.push_back({e[0].get<int>(), e[1].get<int>()});
        } else {
          c.ladder.push_back({e.at("n").get<int>(), e.at("m").get<int>()});
        }
      }
    }
    if (j.contains("incident")) {
      const auto& in = j.at("incident");
      if (in.contains("direction")) {
        c.direction = read_vec2(in.at("direction"), "direction");
        if (c.direction.norm() > 0.0) c.direction.normalize();
      }
      read_opt(in, "plane_omega", c.plane_omega);
      if (in.contains("plane_origin")) c.plane_origin = read_vec2(in.at("plane_origin"), "plane_origin");
      if (in.contains("source")) c.source = read_vec2(in.at("source"), "source");
      read_opt(in, "source_omega", c.source_omega);
      read_opt(in, "window_t0", c.window_t0);
    }
    if (j.contains("sampling")) {
      const auto& s = j.at("sampling");
      read_opt(s, "seed", c.seed);
      read_opt(s, "count", c.sample_count);
      if (s.contains("center")) c.sample_center = read_vec2(s.at("center"), "center");
      read_opt(s, "interior_radius", c.interior_radius);
      read_opt(s, "exterior_radius", c.exterior_radius);
    }
    read_opt(j, "threads", c.threads);
    read_opt(j, "output", c.output);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ScenarioConfig& c) {
  json j;
  j["formulation"] = c.formulation == Formulation::Bie ? "bie" : "coupled";
  j["scheme"] = cq::to_string(c.scheme);
  if (c.geometry == "disk") {
    j["geometry"] = {{"type", "disk"}, {"radius", c.radius}};
  } else {
    j["geometry"] = {{"type", "rectangle"}, {"x_lo", c.x_lo}, {"x_hi", c.x_hi},
                     {"y_lo", c.y_lo},      {"y_hi", c.y_hi}, {"h0", c.h0}};
  }
  j["material"] = {{"lame_lambda", c.material.lame_lambda},
                   {"lame_mu", c.material.lame_mu},
                   {"rho_solid", c.material.rho_solid},
                   {"rho_fluid", c.material.rho_fluid},
                   {"sound_speed", c.material.sound_speed}};
  j["final_time"] = c.final_time;
  j["ladder"] = json::array();
  for (const auto& e : c.ladder) j["ladder"].push_back({{"n", e.n}, {"m", e.m}});
  j["incident"] = {{"direction", vec2_json(c.direction)}, {"plane_omega", c.plane_omega},
                   {"plane_origin", vec2_json(c.plane_origin)}, {"source", vec2_json(c.source)},
                   {"source_omega", c.source_omega}, {"window_t0", c.window_t0}};
  j["sampling"] = {{"seed", c.seed},
                   {"count", c.sample_count},
                   {"center", vec2_json(c.sample_center)},
                   {"interior_radius", c.interior_radius},
                   {"exterior_radius", c.exterior_radius}};
  j["threads"] = c.threads;
  j["output"] = c.output;
  return j.dump(2);
}

// ---------------------------------------------------------------------------

namespace {

struct Problem {
  PlaneWave u;
  CylindricalWave v;
};

Problem make_problem(const ScenarioConfig& c) {
  Problem p;
  p.u.material = c.material;
  p.u.direction = c.direction;
  p.u.omega = c.plane_omega;
  p.u.t0 = c.window_t0;
  p.u.x_ref = c.plane_origin;
  p.v.source = c.source;
  p.v.sound_speed = c.material.sound_speed;
  p.v.signal = {c.source_omega, c.window_t0};
  return p;
}

Eigen::VectorXd exact_u(const Problem& p, std::span<const Vec2> pts, double t) {
  Eigen::VectorXd out(2 * pts.size());
  for (size_t i = 0; i < pts.size(); ++i) out.segment<2>(2 * i) = p.u.displacement(pts[i], t);
  return out;
}

Eigen::VectorXd exact_v(const Problem& p, std::span<const Vec2> pts, double t) {
  Eigen::VectorXd out(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) out(i) = p.v.value(pts[i], t);
  return out;
}

std::vector<std::string> sample_labels(int ni, int ne) {
  std::vector<std::string> labels;
  for (int i = 0; i < ni; ++i) {
    labels.push_back("u_x[" + std::to_string(i) + "]");
    labels.push_back("u_y[" + std::to_string(i) + "]");
  }
  for (int i = 0; i < ne; ++i) labels.push_back("v[" + std::to_string(i) + "]");
  return labels;
}

// samples: rows = [u (2 ni); v (ne)], columns = time steps.
SignalDump make_dump(const LadderEntry& e, const cq::TimeGrid& grid, const Problem& p,
                     std::span<const Vec2> ip, std::span<const Vec2> ep,
                     const Eigen::MatrixXd& samples) {
  SignalDump d;
  d.n = e.n;
  d.m = e.m;
  d.labels = sample_labels(static_cast<int>(ip.size()), static_cast<int>(ep.size()));
  d.computed = samples;
  d.exact.resize(samples.rows(), samples.cols());
  for (int n = 0; n <= grid.steps; ++n) {
    const double t = grid.time(n);
    d.times.push_back(t);
    d.exact.col(n) << exact_u(p, ip, t), exact_v(p, ep, t);
  }
  return d;
}

void run_bie_entry(const ScenarioConfig& c, const LadderEntry& e, const Problem& prob,
                   std::span<const Vec2> ip, std::span<const Vec2> ep, const RunOptions& opt,
                   ReportRow& row, ConvergenceReport& report) {
  const auto mesh = circle_boundary(c.radius, e.n);
  const auto grid = cq::TimeGrid::make(c.final_time, e.m);
  check_evaluation_points(mesh, ip);
  check_evaluation_points(mesh, ep);
  const auto data = synthesize_transmission_data(make_exact_fields(prob.u, prob.v), mesh, grid,
                                                 c.material)
                        .stacked();
  row.unknowns = 3 * mesh.node_count();
  const MaterialParams mat = c.material;
  auto solver = [&](cplx s, const CVector& b) -> CVector {
    const LaplaceFrequency ls(s);
    const auto ops = assemble_boundary_operators(mesh, ls, mat);
    const auto sys = assemble_bie_system(mesh, ls, mat, ops);
    const auto sol = solve_bie_frequency(sys, b);
    const auto f = evaluate_fields(mesh, sol, b, ls, mat, ip, ep);
    CVector out(f.u.size() + f.v.size());
    out << f.u, f.v;
    return out;
  };
  cq::SolveOptions so;
  so.threads = c.threads;
  const auto out = cq::solve(c.scheme, data, solver, so);
  const Eigen::MatrixXd samples = out.values.real();
  const int nu = 2 * static_cast<int>(ip.size());
  const double T = grid.final_time();
  row.e_u = relative_max_error(exact_u(prob, ip, T), samples.col(e.m).head(nu), 2);
  row.e_v = relative_max_error(exact_v(prob, ep, T), samples.col(e.m).tail(ep.size()), 1);
  if (opt.keep_signals) report.signals.push_back(make_dump(e, grid, prob, ip, ep, samples));
}

void run_coupled_entry(const ScenarioConfig& c, const LadderEntry& e, const Problem& prob,
                       std::span<const Vec2> ip, std::span<const Vec2> ep,
                       const RunOptions& opt, ReportRow& row, ConvergenceReport& report) {
  const double h = c.h0 * std::ldexp(1.0, -e.n);
  const double cell = h / std::sqrt(2.0);
  const int nx = static_cast<int>(std::ceil((c.x_hi - c.x_lo) / cell - 1e-9));
  const int ny = static_cast<int>(std::ceil((c.y_hi - c.y_lo) / cell - 1e-9));
  const auto [tm, bm] = triangulate_rectangle(c.x_lo, c.x_hi, c.y_lo, c.y_hi, nx, ny);
  const auto grid = cq::TimeGrid::make(c.final_time, e.m);
  check_evaluation_points(bm, ep);
  const auto where = locate_points(tm, ip);
  const ElasticMaterial em{c.material.lame_lambda, c.material.lame_mu, c.material.rho_solid};
  const auto fem = assemble_elastic_fem(tm, std::span<const ElasticMaterial>(&em, 1));
  const auto data =
      synthesize_transmission_data(make_exact_fields(prob.u, prob.v), bm, grid, c.material)
          .stacked();
  const int nfem = 2 * tm.vertex_count();
  row.unknowns = nfem + bm.node_count() + bm.panel_count();
  const MaterialParams mat = c.material;
  auto solver = [&](cplx s, const CVector& b) -> CVector {
    const auto sys = assemble_coupled_system(LaplaceFrequency(s), tm, bm, fem, mat);
    const auto sol = solve_coupled_frequency(sys, b);
    const CVector v = evaluate_exterior(bm, sol.phi, sol.lambda, s / mat.sound_speed, ep);
    CVector out(nfem + v.size());
    out << sol.u, v;
    return out;
  };
  cq::SolveOptions so;
  so.threads = c.threads;
  const auto out = cq::solve(c.scheme, data, solver, so);
  const double T = grid.final_time();
  const Eigen::VectorXd uT = out.values.col(e.m).head(nfem).real();
  const auto errs = fem_relative_errors(
      tm, uT, [&](const Vec2& x) { return prob.u.displacement(x, T); },
      [&](const Vec2& x) { return prob.u.gradient(x, T); });
  row.e_u_l2 = errs.l2;
  row.e_u_h1 = errs.h1;
  Eigen::MatrixXd samples(2 * ip.size() + ep.size(), e.m + 1);
  for (int n = 0; n <= e.m; ++n) {
    samples.col(n) << interpolate_fem(tm, where, out.values.col(n).head(nfem)).real(),
        out.values.col(n).tail(ep.size()).real();
  }
  const int nu = 2 * static_cast<int>(ip.size());
  row.e_u = relative_max_error(exact_u(prob, ip, T), samples.col(e.m).head(nu), 2);
  row.e_v = relative_max_error(exact_v(prob, ep, T), samples.col(e.m).tail(ep.size()), 1);
  if (opt.keep_signals) report.signals.push_back(make_dump(e, grid, prob, ip, ep, samples));
}

std::string format_value(double x) {
  if (!std::isfinite(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5e", x);
  return buf;
}

std::string format_signal(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9e", x);
  return buf;
}

}  // namespace

ConvergenceReport run_convergence(const ScenarioConfig& config, const RunOptions& options) {
  config.validate();
  ConvergenceReport report;
  report.config = config;
  const Problem prob = make_problem(config);
  const auto ai = sample_angles(config.seed, config.sample_count);
  const auto ae = sample_angles(config.seed ^ 0xa5a5a5a5a5a5a5a5ULL, config.sample_count);
  report.interior_points = circle_points(config.sample_center, config.interior_radius, ai);
  report.exterior_points = circle_points(config.sample_center, config.exterior_radius, ae);
  for (const auto& e : config.ladder) {
    ReportRow row;
    row.n = e.n;
    row.m = e.m;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (config.formulation == Formulation::Bie) {
        run_bie_entry(config, e, prob, report.interior_points, report.exterior_points, options,
                      row, report);
      } else {
        run_coupled_entry(config, e, prob, report.interior_points, report.exterior_points,
                          options, row, report);
      }
    } catch (const std::exception& ex) {
      row.ok = false;
      row.message = ex.what();
      row.e_u = row.e_v = row.e_u_l2 = row.e_u_h1 = kNaN;
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.rows.push_back(row);
    if (options.log) {
      std::ostringstream msg;
      msg << "N=" << e.n << " M=" << e.m << (row.ok ? "" : " FAILED: " + row.message)
          << " E^u=" << row.e_u << " E^v=" << row.e_v;
      if (config.formulation == Formulation::Coupled) {
        msg << " E^u_L2=" << row.e_u_l2 << " E^u_H1=" << row.e_u_h1;
      }
      msg << " (" << row.seconds << " s)";
      options.log(msg.str());
    }
  }
  for (size_t i = 0; i < report.rows.size(); ++i) {
    auto& r = report.rows[i];
    if (i == 0 || !r.ok || !report.rows[i - 1].ok) {
      r.ecr_u = r.ecr_v = r.ecr_u_l2 = r.ecr_u_h1 = kNaN;
      continue;
    }
    const auto& p = report.rows[i - 1];
    r.ecr_u = ecr(p.e_u, r.e_u);
    r.ecr_v = ecr(p.e_v, r.e_v);
    r.ecr_u_l2 = ecr(p.e_u_l2, r.e_u_l2);
    r.ecr_u_h1 = ecr(p.e_u_h1, r.e_u_h1);
  }
  return report;
}

void write_report_csv(std::ostream& os, const ConvergenceReport& report) {
  const bool coupled = report.config.formulation == Formulation::Coupled;
  os << "N,M,E^u,ecr_u,E^v,ecr_v";
  if (coupled) os << ",E^u_L2,ecr_u_L2,E^u_H1,ecr_u_H1";
  os << ",status\n";
  for (const auto& r : report.rows) {
    os << r.n << ',' << r.m << ',' << format_value(r.e_u) << ',' << format_value(r.ecr_u) << ','
       << format_value(r.e_v) << ',' << format_value(r.ecr_v);
    if (coupled) {
      os << ',' << format_value(r.e_u_l2) << ',' << format_value(r.ecr_u_l2) << ','
         << format_value(r.e_u_h1) << ',' << format_value(r.ecr_u_h1);
    }
    os << ',' << (r.ok ? "ok" : "failed") << '\n';
  }
}

void write_report_metadata(std::ostream& os, const ConvergenceReport& report) {
  json j;
  j["config"] = json::parse(config_to_json(report.config));
  j["seed"] = report.config.seed;
  j["interior_points"] = json::array();
  for (const auto& p : report.interior_points) j["interior_points"].push_back(vec2_json(p));
  j["exterior_points"] = json::array();
  for (const auto& p : report.exterior_points) j["exterior_points"].push_back(vec2_json(p));
  j["entries"] = json::array();
  for (const auto& r : report.rows) {
    j["entries"].push_back({{"N", r.n},
                            {"M", r.m},
                            {"status", r.ok ? "ok" : "failed"},
                            {"message", r.message},
                            {"unknowns", r.unknowns},
                            {"seconds", r.seconds}});
  }
  os << j.dump(2) << '\n';
}

void write_signals_csv(std::ostream& os, const ConvergenceReport& report) {
  os << "N,M,step,time,label,computed,exact\n";
  for (const auto& d : report.signals) {
    for (size_t n = 0; n < d.times.size(); ++n) {
      for (size_t k = 0; k < d.labels.size(); ++k) {
        os << d.n << ',' << d.m << ',' << n << ',' << format_signal(d.times[n]) << ','
           << d.labels[k] << ',' << format_signal(d.computed(k, n)) << ','
           << format_signal(d.exact(k, n)) << '\n';
      }
    }
  }
}

}  // namespace wavestruct::scenarios
