#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wavestruct/bem.hpp"

namespace wavestruct {

namespace {

CSparse to_complex(const RSparse& a) { return a.cast<cplx>(); }

int local_size(const BoundaryMesh& mesh, int components) {
  return 2 * mesh.panel_count() * components;
}

void require_components(int components) {
  if (components != 1 && components != 2) {
    throw ParameterError("BemSpace: components must be 1 or 2");
  }
}

}  // namespace

const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::V: return "V";
    case OperatorKind::K: return "K";
    case OperatorKind::Kt: return "Kt";
    case OperatorKind::W: return "W";
  }
  return "?";
}

BemSpace BemSpace::make(const BoundaryMesh& mesh, SpaceKind kind, int components) {
  require_components(components);
  BemSpace sp;
  sp.kind = kind;
  sp.components = components;
  switch (kind) {
    case SpaceKind::P0: sp.dof_count = mesh.panel_count() * components; break;
    case SpaceKind::P1: sp.dof_count = mesh.node_count() * components; break;
    case SpaceKind::DP1: sp.dof_count = 2 * mesh.panel_count() * components; break;
  }
  return sp;
}

RSparse local_map(const BoundaryMesh& mesh, const BemSpace& space) {
  require_components(space.components);
  const int nc = space.components;
  std::vector<Eigen::Triplet<double>> trip;
  for (int p = 0; p < mesh.panel_count(); ++p) {
    for (int e = 0; e < 2; ++e) {
      int scalar_dof = 0;
      switch (space.kind) {
        case SpaceKind::P0: scalar_dof = p; break;
        case SpaceKind::P1: scalar_dof = mesh.panels()[p][e]; break;
        case SpaceKind::DP1: scalar_dof = 2 * p + e; break;
      }
      for (int c = 0; c < nc; ++c) {
        trip.emplace_back(nc * (2 * p + e) + c, nc * scalar_dof + c, 1.0);
      }
    }
  }
  RSparse m(local_size(mesh, nc), space.dof_count);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

RSparse normal_component_map(const BoundaryMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int p = 0; p < mesh.panel_count(); ++p) {
    for (int e = 0; e < 2; ++e) {
      const int node = mesh.panels()[p][e];
      for (int c = 0; c < 2; ++c) trip.emplace_back(2 * p + e, 2 * node + c, mesh.normal(p)[c]);
    }
  }
  RSparse m(2 * mesh.panel_count(), 2 * mesh.node_count());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

RSparse normal_extension_map(const BoundaryMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int p = 0; p < mesh.panel_count(); ++p) {
    for (int e = 0; e < 2; ++e) {
      const int node = mesh.panels()[p][e];
      for (int c = 0; c < 2; ++c) trip.emplace_back(4 * p + 2 * e + c, node, mesh.normal(p)[c]);
    }
  }
  RSparse m(4 * mesh.panel_count(), mesh.node_count());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

RSparse local_mass(const BoundaryMesh& mesh, int components) {
  require_components(components);
  const int nc = components;
  std::vector<Eigen::Triplet<double>> trip;
  for (int p = 0; p < mesh.panel_count(); ++p) {
    const double h = mesh.length(p);
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double m = h * (a == b ? 2.0 : 1.0) / 6.0;
        for (int c = 0; c < nc; ++c) trip.emplace_back(nc * (2 * p + a) + c, nc * (2 * p + b) + c, m);
      }
    }
  }
  RSparse m(local_size(mesh, nc), local_size(mesh, nc));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

CMatrix mass_matrix(const BoundaryMesh& mesh, const BemSpace& row_space,
                    const BemSpace& col_space) {
  if (row_space.components != col_space.components) {
    throw ParameterError("mass_matrix: component mismatch");
  }
  const RSparse m = local_map(mesh, row_space).transpose() *
                    local_mass(mesh, row_space.components) * local_map(mesh, col_space);
  return CMatrix(m.cast<cplx>());
}

CMatrix restrict_operator(const LocalOperators& local, OperatorKind kind,
                          const BoundaryMesh& mesh, const BemSpace& row_space,
                          const BemSpace& col_space) {
  if (row_space.components != col_space.components) {
    throw ParameterError("restrict_operator: component mismatch");
  }
  const int nc = row_space.components;
  const bool vector = nc == 2;
  if (local.V.rows() != local_size(mesh, nc)) {
    throw ParameterError("restrict_operator: local operators do not match the space");
  }
  if (kind == OperatorKind::W && !(row_space.continuous() && col_space.continuous())) {
    throw ParameterError("restrict_operator: W needs continuous P1 spaces");
  }
  if (vector && kind == OperatorKind::K && !col_space.continuous()) {
    throw ParameterError("restrict_operator: elastic K needs a continuous trial space");
  }
  if (vector && kind == OperatorKind::Kt && !row_space.continuous()) {
    throw ParameterError("restrict_operator: elastic Kt needs a continuous test space");
  }
  const CSparse lr = to_complex(local_map(mesh, row_space));
  const CSparse lc = to_complex(local_map(mesh, col_space));
  switch (kind) {
    case OperatorKind::V: return lr.transpose() * (local.V * lc);
    case OperatorKind::K: return lr.transpose() * (local.K * lc);
    case OperatorKind::W: return lr.transpose() * (local.W * lc);
    case OperatorKind::Kt: return (lc.transpose() * (local.K * lr)).transpose();
  }
  throw ParameterError("restrict_operator: unknown kind");
}

OperatorBlock assemble_acoustic_block(OperatorKind kind, const BoundaryMesh& mesh,
                                      const BemSpace& row_space, const BemSpace& col_space,
                                      cplx s_over_c) {
  if (row_space.components != 1 || col_space.components != 1) {
    throw ParameterError("assemble_acoustic_block: scalar spaces required");
  }
  MaterialParams unit;
  unit.sound_speed = 1.0;
  const LaplaceFrequency k(s_over_c);
  const auto ops = assemble_boundary_operators(mesh, k, unit, {true, false});
  return {restrict_operator(ops.acoustic, kind, mesh, row_space, col_space), row_space,
          col_space, kind, false, s_over_c};
}

OperatorBlock assemble_elastic_block(OperatorKind kind, const BoundaryMesh& mesh,
                                     const BemSpace& row_space, const BemSpace& col_space,
                                     LaplaceFrequency s, const MaterialParams& mat) {
  if (row_space.components != 2 || col_space.components != 2) {
    throw ParameterError("assemble_elastic_block: vector spaces required");
  }
  const auto ops = assemble_boundary_operators(mesh, s, mat, {false, true});
  return {restrict_operator(ops.elastic, kind, mesh, row_space, col_space), row_space,
          col_space, kind, true, s.value()};
}

BieSystem assemble_bie_system(const BoundaryMesh& mesh, LaplaceFrequency s,
                              const MaterialParams& mat) {
  return assemble_bie_system(mesh, s, mat, assemble_boundary_operators(mesh, s, mat));
}

BieSystem assemble_bie_system(const BoundaryMesh& mesh, LaplaceFrequency s,
                              const MaterialParams& mat, const BoundaryOperators& ops) {
  mat.validate();
  if (!ops.has_acoustic || !ops.has_elastic) {
    throw ParameterError("assemble_bie_system: needs acoustic and elastic operators");
  }
  const cplx sv = s.value();
  const double rho = mat.rho_fluid;
  const CSparse P = to_complex(local_map(mesh, BemSpace::make(mesh, SpaceKind::P1, 1)));
  const CSparse Pv = to_complex(local_map(mesh, BemSpace::make(mesh, SpaceKind::P1, 2)));
  const CSparse N = to_complex(normal_component_map(mesh));
  const CSparse Nt = to_complex(normal_extension_map(mesh));
  const CSparse Md = to_complex(local_mass(mesh, 1));
  const CSparse Mvd = to_complex(local_mass(mesh, 2));
  const auto& A = ops.acoustic;
  const auto& E = ops.elastic;

  const int ne = static_cast<int>(Pv.cols());
  const int ns = static_cast<int>(P.cols());
  const int nl = static_cast<int>(P.rows());
  const int ng = static_cast<int>(Pv.rows());

  BieSystem sys;
  sys.elastic_dofs = ne;
  sys.acoustic_dofs = ns;
  sys.lambda_dofs = nl;
  sys.traction_dofs = ng;
  sys.frequency = sv;
  sys.lhs.resize(ne + ns, ne + ns);
  sys.rhs_map.resize(ne + ns, nl + ng);

  const CMatrix KaP = A.K * P;        // acoustic K on continuous trial
  const CMatrix KePv = E.K * Pv;      // elastic K on continuous trial
  const CMatrix VeNt = E.V * Nt;
  const CMatrix cross = rho * sv * (N.transpose() * KaP - (Nt.transpose() * KePv).transpose());

  sys.lhs.topLeftCorner(ne, ne) =
      Pv.transpose() * (E.W * Pv) + (rho * sv * sv) * (N.transpose() * (A.V * N));
  sys.lhs.topRightCorner(ne, ns) = cross;
  sys.lhs.bottomLeftCorner(ns, ne) = -cross.transpose();
  sys.lhs.bottomRightCorner(ns, ns) =
      (rho * sv) * (rho * sv) * (Nt.transpose() * VeNt) + rho * (P.transpose() * (A.W * P));

  sys.rhs_map.topLeftCorner(ne, nl) = (-rho * sv) * (N.transpose() * A.V);
  sys.rhs_map.topRightCorner(ne, ng) = 0.5 * (Pv.transpose() * Mvd) - KePv.transpose();
  sys.rhs_map.bottomLeftCorner(ns, nl) = rho * (0.5 * (P.transpose() * Md) + KaP.transpose());
  sys.rhs_map.bottomRightCorner(ns, ng) = (rho * sv) * VeNt.transpose();
  return sys;
}

CVector dense_solve(const CMatrix& a, const CVector& b, cplx s, SolveInfo* info) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw ParameterError("dense_solve: dimension mismatch");
  }
  const Eigen::PartialPivLU<CMatrix> lu(a);
  // rcond() misses exact zero pivots (it reports 1 for diag(1,1,1,0)), so
  // the pivot spread bounds it from below.
  const Eigen::VectorXd piv = lu.matrixLU().diagonal().cwiseAbs();
  const double spread = piv.size() > 0 && piv.maxCoeff() > 0.0 ? piv.minCoeff() / piv.maxCoeff() : 0.0;
  const double rcond = std::isfinite(lu.rcond()) ? std::min(lu.rcond(), spread) : 0.0;
  const double condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(rcond > std::numeric_limits<double>::epsilon())) {
    throw SingularSystemError(s, condition,
                              "dense_solve: numerically singular matrix at s = (" +
                                  std::to_string(s.real()) + ", " + std::to_string(s.imag()) +
                                  "), condition estimate " + std::to_string(condition));
  }
  CVector x = lu.solve(b);
  const double bn = b.norm();
  double residual = bn > 0.0 ? (a * x - b).norm() / bn : 0.0;
  if (residual > 1e-13) {
    x += lu.solve(CVector(b - a * x));
    residual = bn > 0.0 ? (a * x - b).norm() / bn : 0.0;
  }
  if (!x.allFinite()) {
    throw SingularSystemError(s, condition, "dense_solve: non-finite solution");
  }
  if (info) {
    info->condition = condition;
    info->residual = residual;
  }
  return x;
}

BieSolution solve_bie_frequency(const BieSystem& system, const CVector& data) {
  if (data.size() != system.rhs_map.cols()) {
    throw ParameterError("solve_bie_frequency: data has " + std::to_string(data.size()) +
                         " entries, expected " + std::to_string(system.rhs_map.cols()));
  }
  const CVector x = dense_solve(system.lhs, system.rhs_map * data, system.frequency);
  return {x.head(system.elastic_dofs), x.tail(system.acoustic_dofs)};
}

FieldValues evaluate_fields(const BoundaryMesh& mesh, const BieSolution& solution,
                            const CVector& data, LaplaceFrequency s,
                            const MaterialParams& mat, std::span<const Vec2> interior_points,
                            std::span<const Vec2> exterior_points) {
  mat.validate();
  const int np = mesh.panel_count();
  if (data.size() != 6 * np) throw ParameterError("evaluate_fields: data size mismatch");
  if (solution.phi_solid.size() != 2 * mesh.node_count() ||
      solution.phi_fluid.size() != mesh.node_count()) {
    throw ParameterError("evaluate_fields: density size mismatch");
  }
  check_evaluation_points(mesh, interior_points);
  check_evaluation_points(mesh, exterior_points);
  const cplx sv = s.value();
  const CVector lambda0 = data.head(2 * np);
  const CVector g0 = data.tail(4 * np);
  const CSparse P = to_complex(local_map(mesh, BemSpace::make(mesh, SpaceKind::P1, 1)));
  const CSparse Pv = to_complex(local_map(mesh, BemSpace::make(mesh, SpaceKind::P1, 2)));
  FieldValues out;
  if (!interior_points.empty()) {
    const auto pot = elastic_potentials(mesh, interior_points, s, mat);
    const CSparse Nt = to_complex(normal_extension_map(mesh));
    const CVector traction = g0 - (mat.rho_fluid * sv) * (Nt * solution.phi_fluid);
    out.u = pot.single * traction - pot.double_ * (Pv * solution.phi_solid);
  } else {
    out.u.resize(0);
  }
  if (!exterior_points.empty()) {
    const auto pot = acoustic_potentials(mesh, exterior_points, sv / mat.sound_speed);
    const CSparse N = to_complex(normal_component_map(mesh));
    const CVector flux = lambda0 + sv * (N * solution.phi_solid);
    out.v = pot.single * flux + pot.double_ * (P * solution.phi_fluid);
  } else {
    out.v.resize(0);
  }
  return out;
}

}  // namespace wavestruct
