#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavestruct/geometry.hpp"

namespace wavestruct {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RSparse = Eigen::SparseMatrix<double>;
using CSparse = Eigen::SparseMatrix<cplx>;
using Mat2c = Eigen::Matrix2cd;

class SingularEvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a dense frequency-domain system is numerically singular.
class SingularSystemError : public std::runtime_error {
 public:
  SingularSystemError(cplx s, double condition, const std::string& what)
      : std::runtime_error(what), s_(s), condition_(condition) {}
  cplx frequency() const { return s_; }
  double condition_estimate() const { return condition_; }

 private:
  cplx s_;
  double condition_;
};

/// Laplace-domain frequency s with Re s > 0.
class LaplaceFrequency {
 public:
  explicit LaplaceFrequency(cplx value);
  cplx value() const { return value_; }
  double sigma() const { return value_.real(); }
  LaplaceFrequency conj() const { return LaplaceFrequency(std::conj(value_)); }

 private:
  cplx value_;
};

struct MaterialParams {
  double lame_lambda = 1.0;
  double lame_mu = 1.0;
  double rho_solid = 1.0;
  double rho_fluid = 1.0;
  double sound_speed = 1.0;

  /// Throws ParameterError when the invariants do not hold.
  void validate() const;
  double pressure_speed() const;
  double shear_speed() const;
};

// ---------------------------------------------------------------------------
// Kernels

/// Fundamental solution of Δ - (s/c)^2: K0((s/c)|x-y|) / 2π.
cplx acoustic_fundamental(const Vec2& x, const Vec2& y, cplx s_over_c);

/// Fundamental solution of Δ* - ρ_Σ s^2 (Laplace-domain Kupradze matrix).
Mat2c elastic_fundamental(const Vec2& x, const Vec2& y, LaplaceFrequency s,
                          const MaterialParams& mat);

namespace detail {

struct AcousticRadial {
  cplx g;   // G(r)
  cplx dg;  // G'(r)
};
AcousticRadial acoustic_radial(cplx k, double r);

/// E = a I + b r̂ r̂ᵀ together with the scalar shear/pressure potentials.
struct ElasticRadial {
  cplx a, b;
  cplx gp, dgp;  // pressure Green's function G(k_P r) and derivative
  cplx gs, dgs;  // shear Green's function G(k_S r) and derivative
};
ElasticRadial elastic_radial(cplx kp, cplx ks, double mu, double lambda_2mu, double r);

/// Rotation angle 2π/n when the mesh is a regular n-gon centred at the origin
/// with panels (p, p+1); assembly then only integrates pairs (0, q).
std::optional<double> rotational_step(const BoundaryMesh& mesh);

}  // namespace detail

// ---------------------------------------------------------------------------
// Discrete spaces on a BoundaryMesh

enum class SpaceKind { P0, P1, DP1 };

/// Boundary element space. Scalar or 2-vector valued. Vector dofs interleave
/// components: dof = 2 * scalar_dof + component.
///
/// Every space is described through its map into the panel-local
/// discontinuous P1 space (panel p, end e in {0,1}: local index 2p+e, or
/// 4p+2e+c for vector fields) where all operators are assembled.
struct BemSpace {
  SpaceKind kind = SpaceKind::P1;
  int components = 1;
  int dof_count = 0;

  static BemSpace make(const BoundaryMesh& mesh, SpaceKind kind, int components = 1);
  bool continuous() const { return kind == SpaceKind::P1; }
  bool operator==(const BemSpace&) const = default;
};

/// Sparse injection of `space` coefficients into local dP1 coefficients.
RSparse local_map(const BoundaryMesh& mesh, const BemSpace& space);

/// Scalar dP1 coefficients of φ·ν for φ in vector P1 (the N operator).
RSparse normal_component_map(const BoundaryMesh& mesh);
/// Vector dP1 coefficients of φ ν for φ in scalar P1 (the Nᵗ operator).
RSparse normal_extension_map(const BoundaryMesh& mesh);

/// L2 Gram matrix of local dP1 (scalar or vector).
RSparse local_mass(const BoundaryMesh& mesh, int components);

/// Galerkin mass/duality matrix ⟨φ_j, ψ_i⟩ between two spaces.
CMatrix mass_matrix(const BoundaryMesh& mesh, const BemSpace& row_space,
                    const BemSpace& col_space);

// ---------------------------------------------------------------------------
// Operators

enum class OperatorKind { V, K, Kt, W };
const char* to_string(OperatorKind kind);

/// Panel-local Galerkin matrices of the layer operators at one frequency.
///   V[a,b] = ⟨V χ_b, χ_a⟩, K[a,b] = ⟨K χ_b, χ_a⟩, W[a,b] = ⟨W χ_b, χ_a⟩
/// K and W rely on tangential integration by parts; they are only meaningful
/// once mapped through a continuous trial (K) or trial and test (W) space.
struct LocalOperators {
  CMatrix V, K, W;
};

struct BoundaryOperators {
  LocalOperators acoustic;  // wave number s/c, scalar dP1
  LocalOperators elastic;   // vector dP1
  bool has_acoustic = false;
  bool has_elastic = false;
};

struct AssemblyOptions {
  bool acoustic = true;
  bool elastic = true;
};

/// One pass over all panel pairs producing every requested local matrix.
BoundaryOperators assemble_boundary_operators(const BoundaryMesh& mesh, LaplaceFrequency s,
                                              const MaterialParams& mat,
                                              AssemblyOptions options = {});

struct OperatorBlock {
  CMatrix matrix;
  BemSpace row_space;
  BemSpace col_space;
  OperatorKind kind;
  bool elastic = false;
  cplx frequency;
};

OperatorBlock assemble_acoustic_block(OperatorKind kind, const BoundaryMesh& mesh,
                                      const BemSpace& row_space, const BemSpace& col_space,
                                      cplx s_over_c);

OperatorBlock assemble_elastic_block(OperatorKind kind, const BoundaryMesh& mesh,
                                     const BemSpace& row_space, const BemSpace& col_space,
                                     LaplaceFrequency s, const MaterialParams& mat);

/// Restrict precomputed local operators to the given spaces.
CMatrix restrict_operator(const LocalOperators& local, OperatorKind kind,
                          const BoundaryMesh& mesh, const BemSpace& row_space,
                          const BemSpace& col_space);

// ---------------------------------------------------------------------------
// Boundary integral system for the pure BIE formulation

/// Unknowns: [φ_Σ (vector P1), φ_f (scalar P1)].
/// Data:     [λ₀ (scalar dP1), g₀ (vector dP1)] where g₀ is the traction datum
///           t⁻(u) + ρ_f s φ_f ν = g₀ (g₀ = -ρ_f s φ₀ ν recovers the scalar datum).
struct BieSystem {
  CMatrix lhs;
  CMatrix rhs_map;
  int elastic_dofs = 0;
  int acoustic_dofs = 0;
  int lambda_dofs = 0;
  int traction_dofs = 0;
  cplx frequency;
};

BieSystem assemble_bie_system(const BoundaryMesh& mesh, LaplaceFrequency s,
                              const MaterialParams& mat);
BieSystem assemble_bie_system(const BoundaryMesh& mesh, LaplaceFrequency s,
                              const MaterialParams& mat, const BoundaryOperators& ops);

struct BieSolution {
  CVector phi_solid;  // vector P1
  CVector phi_fluid;  // scalar P1
};

/// Dense LU solve. `data` stacks λ₀ and g₀ coefficients.
BieSolution solve_bie_frequency(const BieSystem& system, const CVector& data);

struct SolveInfo {
  double condition = 0.0;  // reciprocal of LAPACK-style rcond estimate
  double residual = 0.0;   // ‖Ax - b‖ / ‖b‖
};

/// Solve A x = b with partial pivoting and one refinement step when needed.
/// Throws SingularSystemError when the condition estimate exceeds 1/eps.
CVector dense_solve(const CMatrix& a, const CVector& b, cplx s, SolveInfo* info = nullptr);

// ---------------------------------------------------------------------------
// Potentials

/// Matrices mapping local dP1 densities to potential values at points.
///   single[i, b]  = S χ_b (x_i),   double_[i, b] = D χ_b (x_i)
/// Elastic versions have two rows per point. The elastic double layer uses the
/// tangential-derivative form, so its input must come from a continuous field.
struct PotentialMatrices {
  CMatrix single;
  CMatrix double_;
};

PotentialMatrices acoustic_potentials(const BoundaryMesh& mesh, std::span<const Vec2> points,
                                      cplx s_over_c);
PotentialMatrices elastic_potentials(const BoundaryMesh& mesh, std::span<const Vec2> points,
                                     LaplaceFrequency s, const MaterialParams& mat);

struct FieldValues {
  CVector u;  // 2 entries per interior point
  CVector v;  // 1 entry per exterior point
};

/// Representation formulas:
///   u = 𝐒 g₀ - ρ_f s 𝐒(φ_f ν) - 𝐃 φ_Σ,   v = S(λ₀ + s φ_Σ·ν) + D φ_f.
FieldValues evaluate_fields(const BoundaryMesh& mesh, const BieSolution& solution,
                            const CVector& data, LaplaceFrequency s,
                            const MaterialParams& mat, std::span<const Vec2> interior_points,
                            std::span<const Vec2> exterior_points);

/// Throws SingularEvaluationError if a point is closer to the curve than the
/// largest panel length.
void check_evaluation_points(const BoundaryMesh& mesh, std::span<const Vec2> points);

}  // namespace wavestruct
