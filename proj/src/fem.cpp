#include "wavestruct/fem.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <string>

namespace wavestruct {

namespace {

using Mat2 = Eigen::Matrix2d;

// Gradients of the three barycentric hat functions (rows) on triangle t.
Eigen::Matrix<double, 3, 2> hat_gradients(const TriMesh& mesh, int t, double& area) {
  const auto& tri = mesh.triangles()[t];
  const Vec2& a = mesh.vertices()[tri[0]];
  const Vec2& b = mesh.vertices()[tri[1]];
  const Vec2& c = mesh.vertices()[tri[2]];
  const double det = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
  area = 0.5 * det;
  Eigen::Matrix<double, 3, 2> g;
  g.row(0) << (b.y() - c.y()) / det, (c.x() - b.x()) / det;
  g.row(1) << (c.y() - a.y()) / det, (a.x() - c.x()) / det;
  g.row(2) << (a.y() - b.y()) / det, (b.x() - a.x()) / det;
  return g;
}

void validate(const ElasticMaterial& m) {
  if (!(m.lame_mu > 0.0) || !(m.lame_lambda + m.lame_mu > 0.0) || !(m.rho > 0.0)) {
    throw ParameterError("ElasticMaterial: need mu > 0, lambda + mu > 0, rho > 0");
  }
}

// Degree-4 symmetric rule on the reference triangle (barycentric, weights sum to 1).
struct TriPoint {
  double l0, l1, l2, w;
};
const std::array<TriPoint, 6>& triangle_rule() {
  static const std::array<TriPoint, 6> rule = [] {
    const double a = 0.445948490915965, wa = 0.223381589678011;
    const double b = 0.091576213509771, wb = 0.109951743655322;
    return std::array<TriPoint, 6>{{{a, a, 1 - 2 * a, wa},
                                    {a, 1 - 2 * a, a, wa},
                                    {1 - 2 * a, a, a, wa},
                                    {b, b, 1 - 2 * b, wb},
                                    {b, 1 - 2 * b, b, wb},
                                    {1 - 2 * b, b, b, wb}}};
  }();
  return rule;
}

}  // namespace

FemSpace FemSpace::make(const TriMesh& mesh) {
  FemSpace sp;
  sp.vertex_count = mesh.vertex_count();
  sp.dof_count = 2 * mesh.vertex_count();
  sp.boundary_vertex = mesh.boundary_vertex();
  return sp;
}

CSparse ElasticFem::at(cplx s) const {
  return stiffness.cast<cplx>() + (s * s) * mass.cast<cplx>();
}

ElasticFem assemble_elastic_fem(const TriMesh& mesh, std::span<const ElasticMaterial> materials) {
  const int nt = mesh.triangle_count();
  if (materials.size() != 1 && static_cast<int>(materials.size()) != nt) {
    throw ParameterError("assemble_elastic_fem: need one material or one per triangle");
  }
  for (const auto& m : materials) validate(m);
  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(36 * nt);
  mt.reserve(18 * nt);
  for (int t = 0; t < nt; ++t) {
    const auto& m = materials.size() == 1 ? materials[0] : materials[t];
    double area = 0.0;
    const auto g = hat_gradients(mesh, t, area);
    if (!(area > 0.0)) {
      throw AssemblyError("assemble_elastic_fem: degenerate triangle " + std::to_string(t));
    }
    // Voigt strain rows (εxx, εyy, 2εxy) for the six local dofs.
    Eigen::Matrix<double, 3, 6> B = Eigen::Matrix<double, 3, 6>::Zero();
    for (int a = 0; a < 3; ++a) {
      B(0, 2 * a) = g(a, 0);
      B(1, 2 * a + 1) = g(a, 1);
      B(2, 2 * a) = g(a, 1);
      B(2, 2 * a + 1) = g(a, 0);
    }
    Eigen::Matrix3d D;
    D << m.lame_lambda + 2 * m.lame_mu, m.lame_lambda, 0, m.lame_lambda,
        m.lame_lambda + 2 * m.lame_mu, 0, 0, 0, m.lame_mu;
    const Eigen::Matrix<double, 6, 6> ke = area * B.transpose() * D * B;
    const auto& tri = mesh.triangles()[t];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        for (int ca = 0; ca < 2; ++ca) {
          for (int cb = 0; cb < 2; ++cb) {
            kt.emplace_back(2 * tri[a] + ca, 2 * tri[b] + cb, ke(2 * a + ca, 2 * b + cb));
          }
        }
        const double me = m.rho * area * (a == b ? 2.0 : 1.0) / 12.0;
        for (int c = 0; c < 2; ++c) mt.emplace_back(2 * tri[a] + c, 2 * tri[b] + c, me);
      }
    }
  }
  ElasticFem fem;
  const int n = 2 * mesh.vertex_count();
  fem.stiffness.resize(n, n);
  fem.mass.resize(n, n);
  fem.stiffness.setFromTriplets(kt.begin(), kt.end());
  fem.mass.setFromTriplets(mt.begin(), mt.end());
  return fem;
}

namespace {

const std::vector<int>& checked_boundary_vertex(const TriMesh& mesh, const BoundaryMesh& boundary) {
  const auto& bv = mesh.boundary_vertex();
  if (static_cast<int>(bv.size()) != boundary.node_count()) {
    throw InterfaceError("boundary mesh is not attached to this triangulation");
  }
  for (int n = 0; n < boundary.node_count(); ++n) {
    if ((mesh.vertices()[bv[n]] - boundary.nodes()[n]).norm() >
        1e-12 * (1.0 + boundary.nodes()[n].norm())) {
      throw InterfaceError("boundary node " + std::to_string(n) + " does not match its vertex");
    }
  }
  return bv;
}

}  // namespace

RSparse fem_trace_map(const TriMesh& mesh, const BoundaryMesh& boundary) {
  const auto& bv = checked_boundary_vertex(mesh, boundary);
  std::vector<Eigen::Triplet<double>> trip;
  for (int n = 0; n < boundary.node_count(); ++n) {
    for (int c = 0; c < 2; ++c) trip.emplace_back(2 * n + c, 2 * bv[n] + c, 1.0);
  }
  RSparse m(2 * boundary.node_count(), 2 * mesh.vertex_count());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

RSparse assemble_trace_normal_coupling(const TriMesh& mesh, const BoundaryMesh& boundary) {
  const auto& bv = checked_boundary_vertex(mesh, boundary);
  std::vector<Eigen::Triplet<double>> trip;
  for (int p = 0; p < boundary.panel_count(); ++p) {
    const double h = boundary.length(p);
    const Vec2& nu = boundary.normal(p);
    const auto& pn = boundary.panels()[p];
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double m = h * (a == b ? 2.0 : 1.0) / 6.0;
        for (int c = 0; c < 2; ++c) trip.emplace_back(2 * bv[pn[a]] + c, pn[b], m * nu[c]);
      }
    }
  }
  RSparse g(2 * mesh.vertex_count(), boundary.node_count());
  g.setFromTriplets(trip.begin(), trip.end());
  return g;
}

CoupledSystem assemble_coupled_system(LaplaceFrequency s, const TriMesh& mesh,
                                      const BoundaryMesh& boundary, const ElasticFem& fem,
                                      const MaterialParams& mat) {
  mat.validate();
  const int nfem = 2 * mesh.vertex_count();
  if (fem.stiffness.rows() != nfem) {
    throw ParameterError("assemble_coupled_system: FEM matrices do not match the mesh");
  }
  const RSparse trace = fem_trace_map(mesh, boundary);
  CoupledSystem sys;
  sys.frequency = s.value();
  sys.rho_fluid = mat.rho_fluid;
  sys.a = fem.at(s.value());
  sys.g = assemble_trace_normal_coupling(mesh, boundary);

  const LaplaceFrequency k(s.value() / mat.sound_speed);
  MaterialParams unit;
  const auto ops = assemble_boundary_operators(boundary, k, unit, {true, false});
  const auto p1 = BemSpace::make(boundary, SpaceKind::P1, 1);
  const auto p0 = BemSpace::make(boundary, SpaceKind::P0, 1);
  sys.w = restrict_operator(ops.acoustic, OperatorKind::W, boundary, p1, p1);
  sys.v = restrict_operator(ops.acoustic, OperatorKind::V, boundary, p0, p0);
  const CMatrix k01 = restrict_operator(ops.acoustic, OperatorKind::K, boundary, p0, p1);
  const CMatrix m01 = mass_matrix(boundary, p0, p1);
  sys.b = -0.5 * m01.transpose() + k01.transpose();
  sys.c = 0.5 * m01 - k01;

  const int np = boundary.panel_count();
  const RSparse P = local_map(boundary, p1);
  const RSparse Pv = local_map(boundary, BemSpace::make(boundary, SpaceKind::P1, 2));
  const RSparse to_u = RSparse(trace.transpose()) * RSparse(Pv.transpose()) * local_mass(boundary, 2);
  const RSparse to_phi = RSparse(P.transpose()) * local_mass(boundary, 1);
  std::vector<Eigen::Triplet<cplx>> tu, tp;
  for (int j = 0; j < to_u.outerSize(); ++j) {
    for (RSparse::InnerIterator it(to_u, j); it; ++it) tu.emplace_back(it.row(), 2 * np + j, it.value());
  }
  for (int j = 0; j < to_phi.outerSize(); ++j) {
    for (RSparse::InnerIterator it(to_phi, j); it; ++it) tp.emplace_back(it.row(), j, it.value());
  }
  sys.rhs_u.resize(nfem, 6 * np);
  sys.rhs_u.setFromTriplets(tu.begin(), tu.end());
  sys.rhs_phi.resize(boundary.node_count(), 6 * np);
  sys.rhs_phi.setFromTriplets(tp.begin(), tp.end());
  return sys;
}

CVector CoupledSystem::apply(const CVector& x) const {
  const int nu = fem_dofs(), nphi = phi_dofs(), nl = lambda_dofs();
  if (x.size() != nu + nphi + nl) throw ParameterError("CoupledSystem::apply: size mismatch");
  const CVector u = x.head(nu), phi = x.segment(nu, nphi), lam = x.tail(nl);
  const CSparse gc = g.cast<cplx>();
  CVector y(x.size());
  y.head(nu) = a * u + (frequency * rho_fluid) * (gc * phi);
  y.segment(nu, nphi) = -frequency * (gc.transpose() * u) + w * phi + b * lam;
  y.tail(nl) = c * phi + v * lam;
  return y;
}

CVector CoupledSystem::rhs(const CVector& data) const {
  if (data.size() != data_size()) throw ParameterError("CoupledSystem::rhs: data size mismatch");
  CVector r = CVector::Zero(fem_dofs() + phi_dofs() + lambda_dofs());
  r.head(fem_dofs()) = rhs_u * data;
  r.segment(fem_dofs(), phi_dofs()) = rhs_phi * data;
  return r;
}

CMatrix CoupledSystem::dense() const {
  const int nu = fem_dofs(), nphi = phi_dofs(), nl = lambda_dofs();
  CMatrix m = CMatrix::Zero(nu + nphi + nl, nu + nphi + nl);
  const CMatrix gc = CMatrix(g.cast<cplx>());
  m.topLeftCorner(nu, nu) = CMatrix(a);
  m.block(0, nu, nu, nphi) = (frequency * rho_fluid) * gc;
  m.block(nu, 0, nphi, nu) = -frequency * gc.transpose();
  m.block(nu, nu, nphi, nphi) = w;
  m.block(nu, nu + nphi, nphi, nl) = b;
  m.block(nu + nphi, nu, nl, nphi) = c;
  m.bottomRightCorner(nl, nl) = v;
  return m;
}

namespace {

// Restarted right-preconditioned GMRES. Returns false if the relative residual
// did not reach `tol` within `max_iter` iterations.
template <class Op, class Prec>
bool gmres(const Op& apply, const Prec& precondition, const CVector& b, CVector& x, double tol,
           int restart, int max_iter) {
  const double bn = b.norm();
  x.setZero(b.size());
  if (bn == 0.0) return true;
  int iter = 0;
  while (iter < max_iter) {
    const CVector r = b - apply(x);
    double beta = r.norm();
    if (beta <= tol * bn) return true;
    const int m = std::min(restart, max_iter - iter);
    CMatrix basis(b.size(), m + 1);
    CMatrix hess = CMatrix::Zero(m + 1, m);
    std::vector<cplx> cs(m), sn(m);
    CVector g = CVector::Zero(m + 1);
    g(0) = beta;
    basis.col(0) = r / beta;
    int k = 0;
    for (; k < m; ++k, ++iter) {
      CVector w = apply(precondition(basis.col(k)));
      for (int j = 0; j <= k; ++j) {
        hess(j, k) = basis.col(j).dot(w);
        w -= hess(j, k) * basis.col(j);
      }
      hess(k + 1, k) = w.norm();
      if (std::abs(hess(k + 1, k)) > 0.0) basis.col(k + 1) = w / hess(k + 1, k);
      for (int j = 0; j < k; ++j) {
        const cplx t = std::conj(cs[j]) * hess(j, k) + std::conj(sn[j]) * hess(j + 1, k);
        hess(j + 1, k) = -sn[j] * hess(j, k) + cs[j] * hess(j + 1, k);
        hess(j, k) = t;
      }
      const double den = std::hypot(std::abs(hess(k, k)), std::abs(hess(k + 1, k)));
      if (den == 0.0) {
        ++k;
        break;
      }
      cs[k] = hess(k, k) / den;
      sn[k] = hess(k + 1, k) / den;
      hess(k, k) = den;
      hess(k + 1, k) = 0.0;
      g(k + 1) = -sn[k] * g(k);
      g(k) = std::conj(cs[k]) * g(k);
      if (std::abs(g(k + 1)) <= tol * bn) {
        ++k;
        ++iter;
        break;
      }
    }
    const CVector y = hess.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    x += precondition(basis.leftCols(k) * y);
  }
  return (b - apply(x)).norm() <= tol * bn;
}

}  // namespace

CoupledSolution solve_coupled_frequency(const CoupledSystem& sys, const CVector& data,
                                        SolveInfo* info) {
  const cplx s = sys.frequency;
  const int nu = sys.fem_dofs(), nphi = sys.phi_dofs(), nl = sys.lambda_dofs();
  Eigen::SparseLU<CSparse, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(sys.a);
  lu.factorize(sys.a);
  if (lu.info() != Eigen::Success) {
    throw SingularSystemError(s, std::numeric_limits<double>::infinity(),
                              "solve_coupled_frequency: sparse LU of A(s) failed: " +
                                  lu.lastErrorMessage());
  }
  const CSparse gc = sys.g.cast<cplx>();
  const CSparse gt = gc.transpose();
  const CVector rhs = sys.rhs(data);
  const CVector z1 = lu.solve(rhs.head(nu));

  // Boundary Schur complement after eliminating u:
  //   [W + s² ρ_f Gᵀ A⁻¹ G, B; C, V] [φ; λ] = [f_φ + s Gᵀ A⁻¹ f_u; 0]
  CMatrix bem(nphi + nl, nphi + nl);
  bem.topLeftCorner(nphi, nphi) = sys.w;
  bem.topRightCorner(nphi, nl) = sys.b;
  bem.bottomLeftCorner(nl, nphi) = sys.c;
  bem.bottomRightCorner(nl, nl) = sys.v;
  CVector srhs(nphi + nl);
  srhs.head(nphi) = rhs.segment(nu, nphi) + s * (gt * z1);
  srhs.tail(nl) = rhs.tail(nl);
  const cplx coupling = s * s * sys.rho_fluid;

  SolveInfo local;
  CVector y;
  const Eigen::PartialPivLU<CMatrix> bem_lu(bem);
  local.condition = 1.0 / bem_lu.rcond();
  auto schur_apply = [&](const CVector& x) {
    CVector out = bem * x;
    const CVector az = lu.solve(CVector(gc * x.head(nphi)));
    out.head(nphi) += coupling * (gt * az);
    return out;
  };
  auto precondition = [&](const CVector& x) { return CVector(bem_lu.solve(x)); };
  constexpr double kTolerance = 1e-13;
  if (!bem.allFinite() || !gmres(schur_apply, precondition, srhs, y, kTolerance, 80, 400)) {
    // Explicit Schur complement: Z = A⁻¹ G in column chunks, keeping Gᵀ Z.
    CMatrix gtz(nphi, nphi);
    constexpr int kChunk = 48;
    for (int j0 = 0; j0 < nphi; j0 += kChunk) {
      const int nc = std::min(kChunk, nphi - j0);
      const CMatrix z = lu.solve(CMatrix(gc.middleCols(j0, nc)));
      gtz.middleCols(j0, nc) = gt * z;
    }
    CMatrix schur = bem;
    schur.topLeftCorner(nphi, nphi) += coupling * gtz;
    y = dense_solve(schur, srhs, s, &local);
  }
  CoupledSolution sol;
  sol.phi = y.head(nphi);
  sol.lambda = y.tail(nl);
  sol.u = lu.solve(CVector(rhs.head(nu) - (s * sys.rho_fluid) * (gc * sol.phi)));
  CVector x(nu + nphi + nl);
  x << sol.u, sol.phi, sol.lambda;
  const double rn = rhs.norm();
  local.residual = rn > 0.0 ? (sys.apply(x) - rhs).norm() / rn : 0.0;
  if (!x.allFinite()) {
    throw SingularSystemError(s, local.condition, "solve_coupled_frequency: non-finite solution");
  }
  if (info) *info = local;
  return sol;
}

CVector evaluate_exterior(const BoundaryMesh& boundary, const CVector& phi,
                          const CVector& lambda, cplx s_over_c, std::span<const Vec2> points) {
  if (phi.size() != boundary.node_count() || lambda.size() != boundary.panel_count()) {
    throw ParameterError("evaluate_exterior: density size mismatch");
  }
  check_evaluation_points(boundary, points);
  if (points.empty()) return CVector(0);
  const auto pot = acoustic_potentials(boundary, points, s_over_c);
  const CSparse P = local_map(boundary, BemSpace::make(boundary, SpaceKind::P1, 1)).cast<cplx>();
  const CSparse P0 = local_map(boundary, BemSpace::make(boundary, SpaceKind::P0, 1)).cast<cplx>();
  return pot.double_ * (P * phi) - pot.single * (P0 * lambda);
}

std::vector<PointLocation> locate_points(const TriMesh& mesh, std::span<const Vec2> points) {
  std::vector<PointLocation> out;
  out.reserve(points.size());
  for (const Vec2& x : points) {
    PointLocation best;
    double best_min = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      const auto& tri = mesh.triangles()[t];
      const Vec2& a = mesh.vertices()[tri[0]];
      const Vec2& b = mesh.vertices()[tri[1]];
      const Vec2& c = mesh.vertices()[tri[2]];
      Mat2 m;
      m.col(0) = b - a;
      m.col(1) = c - a;
      const Vec2 lc = m.partialPivLu().solve(x - a);
      const double l[3] = {1.0 - lc.x() - lc.y(), lc.x(), lc.y()};
      const double lmin = std::min({l[0], l[1], l[2]});
      if (lmin > best_min) {
        best_min = lmin;
        best.triangle = t;
        std::copy(l, l + 3, best.bary);
      }
      if (lmin >= 0.0) break;
    }
    if (best_min < -1e-12) throw ParameterError("locate_points: point outside the mesh");
    out.push_back(best);
  }
  return out;
}

CVector interpolate_fem(const TriMesh& mesh, std::span<const PointLocation> where,
                        const CVector& coefficients) {
  CVector out = CVector::Zero(2 * static_cast<Eigen::Index>(where.size()));
  for (size_t i = 0; i < where.size(); ++i) {
    const auto& tri = mesh.triangles()[where[i].triangle];
    for (int a = 0; a < 3; ++a) {
      for (int c = 0; c < 2; ++c) out(2 * i + c) += where[i].bary[a] * coefficients(2 * tri[a] + c);
    }
  }
  return out;
}

FemErrors fem_relative_errors(const TriMesh& mesh, const Eigen::VectorXd& coefficients,
                              const VectorField& exact, const GradientField& exact_gradient) {
  if (coefficients.size() != 2 * mesh.vertex_count()) {
    throw ParameterError("fem_relative_errors: coefficient size mismatch");
  }
  double e0 = 0.0, e1 = 0.0, n0 = 0.0, n1 = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double area = 0.0;
    const auto g = hat_gradients(mesh, t, area);
    const auto& tri = mesh.triangles()[t];
    Mat2 grad_h = Mat2::Zero();  // grad_h(c, d) = ∂_d u_c
    Vec2 nodal[3];
    for (int a = 0; a < 3; ++a) {
      nodal[a] = Vec2(coefficients[2 * tri[a]], coefficients[2 * tri[a] + 1]);
      grad_h += nodal[a] * g.row(a);
    }
    for (const auto& q : triangle_rule()) {
      const Vec2 x = q.l0 * mesh.vertices()[tri[0]] + q.l1 * mesh.vertices()[tri[1]] +
                     q.l2 * mesh.vertices()[tri[2]];
      const Vec2 uh = q.l0 * nodal[0] + q.l1 * nodal[1] + q.l2 * nodal[2];
      const Vec2 ue = exact(x);
      const Mat2 ge = exact_gradient(x);
      const double w = q.w * area;
      e0 += w * (uh - ue).squaredNorm();
      n0 += w * ue.squaredNorm();
      e1 += w * (grad_h - ge).squaredNorm();
      n1 += w * ge.squaredNorm();
    }
  }
  if (!(n0 > 0.0)) throw ParameterError("fem_relative_errors: exact field vanishes");
  return {std::sqrt(e0 / n0), std::sqrt((e0 + e1) / (n0 + n1))};
}

}  // namespace wavestruct
