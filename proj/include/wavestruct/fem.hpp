#pragma once

#include <Eigen/SparseCore>
#include <functional>
#include <span>
#include <vector>

#include "wavestruct/bem.hpp"
#include "wavestruct/geometry.hpp"

namespace wavestruct {

/// Isotropic material on one triangle.
struct ElasticMaterial {
  double lame_lambda = 1.0;
  double lame_mu = 1.0;
  double rho = 1.0;
};

/// Vector P1 space on a TriMesh: dof = 2 * vertex + component.
struct FemSpace {
  int vertex_count = 0;
  int dof_count = 0;
  /// Boundary node -> FEM vertex (empty when no boundary is attached).
  std::vector<int> boundary_vertex;

  static FemSpace make(const TriMesh& mesh);
};

struct ElasticFem {
  RSparse stiffness;  // (σ(u), ε(w))
  RSparse mass;       // (ρ u, w)
  /// A(s) = K + s^2 M.
  CSparse at(cplx s) const;
};

/// Exact P1 stiffness and consistent mass. `materials` holds one entry per
/// triangle, or a single entry used everywhere.
ElasticFem assemble_elastic_fem(const TriMesh& mesh, std::span<const ElasticMaterial> materials);

/// Selection of the boundary trace: vector P1 dofs on the boundary mesh x FEM dofs.
RSparse fem_trace_map(const TriMesh& mesh, const BoundaryMesh& boundary);

/// G[i, j] = ⟨ψ_j, γw_i · ν⟩ for FEM dof i and scalar boundary P1 dof j.
RSparse assemble_trace_normal_coupling(const TriMesh& mesh, const BoundaryMesh& boundary);

/// Galerkin system of the FEM-BEM coupling at one frequency.
///
/// Unknowns u (vector P1 on the solid), φ (P1 on Γ), λ (P0 on Γ) with the exterior
/// field v = Dφ - Sλ, so that φ = γ⁺v and λ = ∂ν⁺v:
///   A(s) u + s ρ_f G φ                        = ⟨g₀, γw⟩
///   -s Gᵀ u + W φ + (-½ M + Kᵗ) λ              = ⟨λ₀, ψ⟩
///   (½ M - K) φ + V λ                          = 0
/// g₀ = t(u) + ρ_f s γv ν and λ₀ = -s γu·ν - ∂ν v on the same dP1 data layout
/// used by BieSystem.
struct CoupledSystem {
  cplx frequency;
  double rho_fluid = 1.0;
  CSparse a;       // A(s)
  RSparse g;       // trace-normal coupling
  CMatrix w;       // P1 x P1
  CMatrix b;       // P1 x P0: -½M + Kᵗ
  CMatrix c;       // P0 x P1: ½M - K
  CMatrix v;       // P0 x P0
  CSparse rhs_u;   // data -> row 1
  CSparse rhs_phi; // data -> row 2

  int fem_dofs() const { return static_cast<int>(a.rows()); }
  int phi_dofs() const { return static_cast<int>(w.rows()); }
  int lambda_dofs() const { return static_cast<int>(v.rows()); }
  int data_size() const { return static_cast<int>(rhs_u.cols()); }

  /// Apply the full block matrix.
  CVector apply(const CVector& x) const;
  /// Right-hand side for the given data vector.
  CVector rhs(const CVector& data) const;
  /// Dense copy of the full block matrix (small meshes / tests).
  CMatrix dense() const;
};

CoupledSystem assemble_coupled_system(LaplaceFrequency s, const TriMesh& mesh,
                                      const BoundaryMesh& boundary, const ElasticFem& fem,
                                      const MaterialParams& mat);

struct CoupledSolution {
  CVector u;
  CVector phi;
  CVector lambda;
};

/// Eliminates u through a sparse LU of A(s) and solves the dense boundary Schur
/// complement. Throws SingularSystemError on breakdown.
CoupledSolution solve_coupled_frequency(const CoupledSystem& system, const CVector& data,
                                        SolveInfo* info = nullptr);

/// v = Dφ - Sλ at the given points.
CVector evaluate_exterior(const BoundaryMesh& boundary, const CVector& phi,
                          const CVector& lambda, cplx s_over_c, std::span<const Vec2> points);

/// Triangle and barycentric coordinates of a point inside the mesh.
struct PointLocation {
  int triangle = -1;
  double bary[3] = {0.0, 0.0, 0.0};
};
/// Throws ParameterError for a point outside every triangle.
std::vector<PointLocation> locate_points(const TriMesh& mesh, std::span<const Vec2> points);
/// Values of a vector P1 field (2 entries per point).
CVector interpolate_fem(const TriMesh& mesh, std::span<const PointLocation> where,
                        const CVector& coefficients);

/// Relative L2 and H1 errors of a vector P1 field against an exact field.
struct FemErrors {
  double l2 = 0.0;
  double h1 = 0.0;
};
using VectorField = std::function<Vec2(const Vec2&)>;
using GradientField = std::function<Eigen::Matrix2d(const Vec2&)>;
FemErrors fem_relative_errors(const TriMesh& mesh, const Eigen::VectorXd& coefficients,
                              const VectorField& exact, const GradientField& exact_gradient);

}  // namespace wavestruct
