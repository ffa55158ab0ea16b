#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wavestruct/bem.hpp"
#include "wavestruct/cq.hpp"
#include "wavestruct/geometry.hpp"

namespace wavestruct::scenarios {

/// C⁴ ramp: 0 for t <= 0, 1 for t >= t0, degree-9 polynomial in between.
double smooth_heaviside(double t, double t0);
/// d/dt of smooth_heaviside.
double smooth_heaviside_derivative(double t, double t0);

/// Windowed sinusoid g(t) = H(t; t0) sin(ω t).
struct WindowedSine {
  double omega = 1.0;
  double t0 = 1.0;
  double value(double t) const;
  double derivative(double t) const;
};

/// Plane pressure wave u = ψ(ξ) d with ξ = c_L t - (x - x_ref)·d and
/// ψ(ξ) = H(ξ / c_L; t0) sin(ω ξ). The ramp is measured in time units.
struct PlaneWave {
  MaterialParams material;
  Vec2 direction{1.0, 0.0};
  double omega = 1.0;
  double t0 = 1.0;
  Vec2 x_ref{0.0, 0.0};

  double phase(const Vec2& x, double t) const;
  double psi(double xi) const;
  double psi_derivative(double xi) const;
  Vec2 displacement(const Vec2& x, double t) const;
  Vec2 velocity(const Vec2& x, double t) const;
  /// grad(i, j) = ∂_j u_i.
  Eigen::Matrix2d gradient(const Vec2& x, double t) const;
  /// σ(u) ν.
  Vec2 traction(const Vec2& x, double t, const Vec2& normal) const;
};

/// u(x, t) for the plane wave with x_ref = 0 and t0 = 1.
Vec2 plane_pwave(const Vec2& x, double t, const MaterialParams& mat, const Vec2& direction,
                 double omega);

/// Cylindrical wave radiated by a point source with signal g:
///   v(x, t) = (1/2π) ∫_0^{acosh(ct/r)} g(t - (r/c) cosh θ) dθ,  r = |x - x0|,
/// the time-domain counterpart of (1/2π) K0((s/c) r) ĝ(s).
struct CylindricalWave {
  Vec2 source{0.0, 0.0};
  double sound_speed = 1.0;
  WindowedSine signal;

  double value(const Vec2& x, double t) const;
  double time_derivative(const Vec2& x, double t) const;
  Vec2 gradient(const Vec2& x, double t) const;
};

/// Same field synthesised by forward CQ of the transfer (1/2π) K0((s/c) r).
cq::TimeSignal cylindrical_wave(std::span<const Vec2> points, const cq::TimeGrid& grid,
                                const Vec2& source, double sound_speed,
                                const std::function<double(double)>& signal, cq::Scheme scheme);

/// Exact solid/fluid fields used to build boundary data.
struct ExactFields {
  std::function<Vec2(const Vec2&, double)> solid_velocity;
  std::function<Vec2(const Vec2&, double, const Vec2&)> solid_traction;
  std::function<double(const Vec2&, double)> fluid_velocity;   // ∂t v
  std::function<Vec2(const Vec2&, double)> fluid_gradient;     // ∇v
};

ExactFields make_exact_fields(const PlaneWave& u, const CylindricalWave& v);

/// Boundary data sampled at the panel ends (local dP1 layout):
///   λ₀ = -u̇·ν - ∂ν v   (2 per panel),   g₀ = t(u) + ρ_f v̇ ν   (4 per panel).
struct TransmissionData {
  cq::TimeSignal lambda0;
  cq::TimeSignal g0;
  /// Rows [λ₀; g₀], the data layout of BieSystem and CoupledSystem.
  cq::TimeSignal stacked() const;
};

TransmissionData synthesize_transmission_data(const ExactFields& exact,
                                              const BoundaryMesh& boundary,
                                              const cq::TimeGrid& grid,
                                              const MaterialParams& mat);

/// max_i |exact_i - computed_i| / max_i |exact_i| over points; entries of a
/// point are `components` consecutive values.
double relative_max_error(const Eigen::VectorXd& exact, const Eigen::VectorXd& computed,
                          int components);

/// log2(previous / current).
double ecr(double previous, double current);

/// Deterministic low-discrepancy angles in [0, 2π) from a seed.
std::vector<double> sample_angles(std::uint64_t seed, int count);
std::vector<Vec2> circle_points(const Vec2& center, double radius,
                                std::span<const double> angles);

// ---------------------------------------------------------------------------
// Convergence studies

enum class Formulation { Bie, Coupled };

struct LadderEntry {
  int n = 0;  // panels (bie) or refinement level (coupled)
  int m = 0;  // time steps
};

struct ScenarioConfig {
  Formulation formulation = Formulation::Bie;
  cq::Scheme scheme = cq::Scheme::TR;
  // geometry
  std::string geometry = "disk";  // "disk" or "rectangle"
  double radius = 1.0;
  double x_lo = 1.0, x_hi = 3.0, y_lo = 1.0, y_hi = 2.0;
  double h0 = 0.52;  // coupled: h = h0 2^{-n} is the largest triangle edge
  MaterialParams material;
  double final_time = 5.0;
  std::vector<LadderEntry> ladder;
  // incident fields
  Vec2 direction{std::sqrt(0.5), std::sqrt(0.5)};
  double plane_omega = 3.0;
  Vec2 plane_origin{0.0, 0.0};
  double source_omega = 2.0;
  Vec2 source{0.0, 0.0};
  double window_t0 = 1.0;
  // sampling
  std::uint64_t seed = 0x5eed2d0a11ce5eedULL;
  int sample_count = 20;
  Vec2 sample_center{0.0, 0.0};
  double interior_radius = 0.7;
  double exterior_radius = 2.0;
  int threads = 1;
  std::string output = "report.csv";

  /// Throws ParameterError on invalid settings.
  void validate() const;
};

/// Reads the documented JSON layout. Missing keys keep the defaults above.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);
std::string config_to_json(const ScenarioConfig& config);

/// Defaults of the disk BIE study and the rectangle coupled study.
ScenarioConfig disk_study(cq::Scheme scheme);
ScenarioConfig rectangle_study(cq::Scheme scheme);

struct ReportRow {
  int n = 0;
  int m = 0;
  bool ok = true;
  std::string message;
  double e_u = 0.0, e_v = 0.0;
  double ecr_u = 0.0, ecr_v = 0.0;  // NaN on the first row
  // coupled only
  double e_u_l2 = 0.0, e_u_h1 = 0.0;
  double ecr_u_l2 = 0.0, ecr_u_h1 = 0.0;
  double seconds = 0.0;
  int unknowns = 0;
};

/// Sampled computed/exact values at the final-time grid of one ladder entry.
struct SignalDump {
  int n = 0;
  int m = 0;
  std::vector<double> times;
  std::vector<std::string> labels;  // one per sampled scalar
  Eigen::MatrixXd computed;         // labels x times
  Eigen::MatrixXd exact;
};

struct ConvergenceReport {
  ScenarioConfig config;
  std::vector<ReportRow> rows;
  std::vector<SignalDump> signals;
  std::vector<Vec2> interior_points;
  std::vector<Vec2> exterior_points;
};

struct RunOptions {
  bool keep_signals = false;
  std::function<void(const std::string&)> log;
};

ConvergenceReport run_convergence(const ScenarioConfig& config, const RunOptions& options = {});

/// CSV body: header naming the report fields, one row per ladder entry,
/// values in scientific notation with 6 significant digits. Deterministic.
void write_report_csv(std::ostream& os, const ConvergenceReport& report);
/// Metadata (config echo, seed, sample points, timings) as JSON.
void write_report_metadata(std::ostream& os, const ConvergenceReport& report);
/// Long-format time series: N,M,step,time,label,computed,exact.
void write_signals_csv(std::ostream& os, const ConvergenceReport& report);

}  // namespace wavestruct::scenarios
