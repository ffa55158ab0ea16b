// Helpers shared by the unit tests and the acceptance binary.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "wavestruct/bem.hpp"

namespace checks {

using namespace wavestruct;

inline BoundaryMesh ellipse(double a, double b, int n) {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 2>> panels;
  for (int i = 0; i < n; ++i) {
    const double t = 2 * std::numbers::pi * i / n;
    nodes.emplace_back(a * std::cos(t), b * std::sin(t));
    panels.push_back({i, (i + 1) % n});
  }
  return BoundaryMesh(nodes, panels);
}

/// ‖M⁻¹V M⁻¹W f − (¼ − (M⁻¹K)²) f‖ for a smooth f, scaled like an L2 norm.
inline double calderon_residual(const BoundaryMesh& mesh, const LocalOperators& ops,
                                int comps) {
  const auto sp = BemSpace::make(mesh, SpaceKind::P1, comps);
  const CMatrix V = restrict_operator(ops, OperatorKind::V, mesh, sp, sp);
  const CMatrix K = restrict_operator(ops, OperatorKind::K, mesh, sp, sp);
  const CMatrix W = restrict_operator(ops, OperatorKind::W, mesh, sp, sp);
  const Eigen::PartialPivLU<CMatrix> lu(mass_matrix(mesh, sp, sp));
  const int n = mesh.node_count();
  CVector f(sp.dof_count);
  for (int i = 0; i < n; ++i) {
    const double th = 2 * std::numbers::pi * i / n;
    if (comps == 1) {
      f(i) = std::cos(3 * th) + 0.5 * std::sin(th);
    } else {
      f(2 * i) = std::cos(2 * th);
      f(2 * i + 1) = std::sin(3 * th) + 0.3;
    }
  }
  const CVector a = lu.solve(V * lu.solve(W * f));
  const CVector b = 0.25 * f - lu.solve(K * lu.solve(K * f));
  return (a - b).norm() / std::sqrt(double(n));
}

/// Relative error of the Rayleigh quotient of e^{imθ} for V on the unit circle
/// against I_m(s) K_m(s).
inline double circle_eigen_error(int n, cplx s, int m) {
  const auto mesh = circle_boundary(1.0, n);
  const auto p1 = BemSpace::make(mesh, SpaceKind::P1);
  const CMatrix v = assemble_acoustic_block(OperatorKind::V, mesh, p1, p1, s).matrix;
  const CMatrix mass = mass_matrix(mesh, p1, p1);
  CVector c(n);
  for (int j = 0; j < n; ++j) c(j) = std::polar(1.0, 2 * std::numbers::pi * m * j / n);
  const cplx eig = c.dot(v * c) / c.dot(mass * c);
  const cplx exact = oracle::bessel_i_series(m, s) * oracle::bessel_k_orders(m, s)[m];
  return std::abs(eig - exact) / std::abs(exact);
}

}  // namespace checks
