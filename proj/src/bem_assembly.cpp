#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <array>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <string>

#include "wavestruct/bem.hpp"
#include "wavestruct/quadrature.hpp"

namespace wavestruct {

namespace {

using Vec2c = Eigen::Vector2cd;
using Mat2 = Eigen::Matrix2d;

// Beyond this value of Re(k) r the kernels are below double underflow.
constexpr double kUnderflowArgument = 745.0;

const Mat2 kJ = (Mat2() << 0.0, -1.0, 1.0, 0.0).finished();

struct KernelContext {
  bool acoustic = false;
  bool elastic = false;
  cplx ka;      // acoustic wave number s/c
  cplx kp, ks;  // pressure, shear wave numbers
  double mu = 1.0;
  double lambda_2mu = 3.0;
  cplx rho_s2;  // ρ_Σ s^2

  double min_decay() const {
    double d = std::numeric_limits<double>::infinity();
    if (acoustic) d = std::min(d, ka.real());
    if (elastic) d = std::min({d, kp.real(), ks.real()});
    return d;
  }
};

struct PanelGeo {
  Vec2 nu, tau;
  double h;
  double d[2];  // arclength derivatives of the two hat functions
};

PanelGeo panel_geo(const BoundaryMesh& mesh, int p) {
  const double h = mesh.length(p);
  return {mesh.normal(p), mesh.tangent(p), h, {-1.0 / h, 1.0 / h}};
}

struct PairBlocks {
  cplx aV[2][2], aK[2][2], aW[2][2];
  Mat2c eV[2][2], eK[2][2], eW[2][2];
  // K with the roles of the panels exchanged: test on Q (index b), trial on P (index a).
  cplx aK_swap[2][2];
  Mat2c eK_swap[2][2];

  void clear() {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        aV[a][b] = aK[a][b] = aW[a][b] = aK_swap[a][b] = 0.0;
        eV[a][b].setZero();
        eK[a][b].setZero();
        eW[a][b].setZero();
        eK_swap[a][b].setZero();
      }
    }
  }
};

// Adds one quadrature point of the panel pair (x on panel P, y on panel Q).
// With `swap`, also accumulates K for x on Q and y on P at the mirrored point.
void accumulate(const KernelContext& c, const PanelGeo& P, const PanelGeo& Q, const Vec2& z,
                const double chx[2], const double chy[2], double w, bool swap,
                PairBlocks& out) {
  const double r = z.norm();
  const Vec2 zh = z / r;
  if (c.acoustic) {
    const auto g = detail::acoustic_radial(c.ka, r);
    const cplx dn = -g.dg * zh.dot(Q.nu);
    const cplx dn_swap = g.dg * zh.dot(P.nu);
    const cplx k2nn = c.ka * c.ka * P.nu.dot(Q.nu);
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double cc = w * chx[a] * chy[b];
        out.aV[a][b] += cc * g.g;
        out.aK[a][b] += cc * dn;
        out.aW[a][b] += g.g * (w * P.d[a] * Q.d[b] + cc * k2nn);
        if (swap) out.aK_swap[a][b] += cc * dn_swap;
      }
    }
  }
  if (c.elastic) {
    const auto e = detail::elastic_radial(c.kp, c.ks, c.mu, c.lambda_2mu, r);
    const Mat2 zz = zh * zh.transpose();
    const Mat2c E = e.a * Mat2::Identity().cast<cplx>() + e.b * zz.cast<cplx>();
    const Mat2c EJ = E * kJ.cast<cplx>();
    const Mat2c JEJ = kJ.cast<cplx>() * EJ;
    const Vec2c gp = e.dgp * zh.cast<cplx>();
    const Vec2c gs = e.dgs * zh.cast<cplx>();
    const Vec2c Jgp = kJ.cast<cplx>() * gp;
    const Vec2c Jgs = kJ.cast<cplx>() * gs;
    const Vec2c JTgp = kJ.transpose().cast<cplx>() * gp;
    const Mat2c A1 = (2.0 * c.mu) * EJ;
    const Mat2c A2 = -gp * Q.nu.transpose().cast<cplx>() - Jgs * Q.tau.transpose().cast<cplx>();
    const Mat2c B1 = e.gp * (P.nu * Q.nu.transpose()).cast<cplx>() +
                     e.gs * (P.tau * Q.tau.transpose()).cast<cplx>();
    const Mat2c C1 = P.nu.cast<cplx>() * JTgp.transpose() + P.tau.cast<cplx>() * gs.transpose();
    const Mat2c C2 = Jgp * Q.nu.transpose().cast<cplx>() - gs * Q.tau.transpose().cast<cplx>();
    const double mu2 = 4.0 * c.mu * c.mu;
    Mat2c A2_swap;
    if (swap) {
      A2_swap = gp * P.nu.transpose().cast<cplx>() + Jgs * P.tau.transpose().cast<cplx>();
    }
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double cc = w * chx[a] * chy[b];
        out.eV[a][b] += cc * E;
        out.eK[a][b] += (w * chx[a] * Q.d[b]) * A1 + cc * A2;
        out.eW[a][b] += (mu2 * w * P.d[a] * Q.d[b]) * JEJ + (cc * c.rho_s2) * B1 -
                        (2.0 * c.mu * w * chx[a] * Q.d[b]) * C1 -
                        (2.0 * c.mu * w * P.d[a] * chy[b]) * C2;
        if (swap) out.eK_swap[a][b] += (w * chy[b] * P.d[a]) * A1 + cc * A2_swap;
      }
    }
  }
}

double segment_point_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double t = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (x - (a + t * ab)).norm();
}

double panel_distance(const BoundaryMesh& mesh, int p, int q) {
  return std::min({segment_point_distance(mesh.start(p), mesh.start(q), mesh.end(q)),
                   segment_point_distance(mesh.end(p), mesh.start(q), mesh.end(q)),
                   segment_point_distance(mesh.start(q), mesh.start(p), mesh.end(p)),
                   segment_point_distance(mesh.end(q), mesh.start(p), mesh.end(p))});
}

int far_order(double ratio) {
  if (ratio < 1.5) return 10;
  if (ratio < 4.0) return 6;
  return 4;
}

// Integrates all requested kernels over panel pair (p, q), p != q giving both
// orientations. Returns false when every kernel underflows on the pair.
bool integrate_pair(const KernelContext& c, const BoundaryMesh& mesh, int p, int q,
                    PairBlocks& out) {
  out.clear();
  const PanelGeo P = panel_geo(mesh, p);
  const PanelGeo Q = panel_geo(mesh, q);
  const auto& pp = mesh.panels()[p];
  const auto& pq = mesh.panels()[q];
  double chx[2], chy[2];
  if (p == q) {
    const auto& rule = quad::diagonal_singular();
    for (int i = 0; i < rule.size(); ++i) {
      const double s = rule.s[i], t = rule.t[i];
      chx[0] = 1.0 - s;
      chx[1] = s;
      chy[0] = 1.0 - t;
      chy[1] = t;
      accumulate(c, P, Q, ((s - t) * P.h) * P.tau, chx, chy, rule.w[i] * P.h * Q.h, false, out);
    }
    return true;
  }
  if (pp[1] == pq[0] || pp[0] == pq[1]) {
    // Parametrise both panels by the distance from the shared vertex.
    const bool p_ends_there = pp[1] == pq[0];
    const double sx = p_ends_there ? -1.0 : 1.0;
    const auto& rule = quad::corner_singular();
    for (int i = 0; i < rule.size(); ++i) {
      const double u = rule.s[i], v = rule.t[i];
      if (p_ends_there) {
        chx[0] = u;
        chx[1] = 1.0 - u;
        chy[0] = 1.0 - v;
        chy[1] = v;
      } else {
        chx[0] = 1.0 - u;
        chx[1] = u;
        chy[0] = v;
        chy[1] = 1.0 - v;
      }
      const Vec2 z = (sx * u * P.h) * P.tau + (sx * v * Q.h) * Q.tau;
      accumulate(c, P, Q, z, chx, chy, rule.w[i] * P.h * Q.h, true, out);
    }
    return true;
  }
  const double dist = panel_distance(mesh, p, q);
  if (dist * c.min_decay() > kUnderflowArgument) return false;
  const auto& rule = quad::tensor(far_order(dist / std::max(P.h, Q.h)));
  const Vec2 offset = mesh.start(p) - mesh.start(q);
  const Vec2 ep = mesh.end(p) - mesh.start(p);
  const Vec2 eq = mesh.end(q) - mesh.start(q);
  for (int i = 0; i < rule.size(); ++i) {
    const double s = rule.s[i], t = rule.t[i];
    chx[0] = 1.0 - s;
    chx[1] = s;
    chy[0] = 1.0 - t;
    chy[1] = t;
    accumulate(c, P, Q, offset + s * ep - t * eq, chx, chy, rule.w[i] * P.h * Q.h, true, out);
  }
  return true;
}

// Pair integrals depend only on the relative position of the two panels; meshes
// with repeated panel configurations (uniformly split sides) reuse them.
struct PairKey {
  std::array<std::int64_t, 6> v;
  int adjacency;
  bool operator==(const PairKey&) const = default;
};

struct PairKeyHash {
  size_t operator()(const PairKey& k) const {
    size_t h = static_cast<size_t>(k.adjacency);
    for (auto x : k.v) h = h * 1000003u ^ std::hash<std::int64_t>()(x);
    return h;
  }
};

PairKey pair_key(const BoundaryMesh& mesh, int p, int q, double quantum) {
  const Vec2 d = mesh.start(q) - mesh.start(p);
  const Vec2 ep = mesh.end(p) - mesh.start(p);
  const Vec2 eq = mesh.end(q) - mesh.start(q);
  const auto& pp = mesh.panels()[p];
  const auto& pq = mesh.panels()[q];
  auto qz = [quantum](double x) { return std::llround(x / quantum); };
  return {{qz(d.x()), qz(d.y()), qz(ep.x()), qz(ep.y()), qz(eq.x()), qz(eq.y())},
          (pp[1] == pq[0] ? 1 : 0) + (pp[0] == pq[1] ? 2 : 0)};
}

Mat2 rotation(double angle) {
  const double cs = std::cos(angle), sn = std::sin(angle);
  return (Mat2() << cs, -sn, sn, cs).finished();
}

void scatter(const PairBlocks& blk, int p, int q, const Mat2* rot, BoundaryOperators& ops) {
  const Mat2c R = rot ? Mat2c(rot->cast<cplx>()) : Mat2c(Mat2c::Identity());
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      if (ops.has_acoustic) {
        const int i = 2 * p + a, j = 2 * q + b;
        ops.acoustic.V(i, j) = blk.aV[a][b];
        ops.acoustic.K(i, j) = blk.aK[a][b];
        ops.acoustic.W(i, j) = blk.aW[a][b];
      }
      if (ops.has_elastic) {
        const int i = 4 * p + 2 * a, j = 4 * q + 2 * b;
        ops.elastic.V.block<2, 2>(i, j) = R * blk.eV[a][b] * R.transpose();
        ops.elastic.K.block<2, 2>(i, j) = R * blk.eK[a][b] * R.transpose();
        ops.elastic.W.block<2, 2>(i, j) = R * blk.eW[a][b] * R.transpose();
      }
    }
  }
}

// Writes the (q, p) blocks from a pair integrated as (p, q).
void scatter_swapped(const PairBlocks& blk, int p, int q, BoundaryOperators& ops) {
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      if (ops.has_acoustic) {
        const int i = 2 * q + b, j = 2 * p + a;
        ops.acoustic.V(i, j) = blk.aV[a][b];
        ops.acoustic.K(i, j) = blk.aK_swap[a][b];
        ops.acoustic.W(i, j) = blk.aW[a][b];
      }
      if (ops.has_elastic) {
        const int i = 4 * q + 2 * b, j = 4 * p + 2 * a;
        ops.elastic.V.block<2, 2>(i, j) = blk.eV[a][b].transpose();
        ops.elastic.K.block<2, 2>(i, j) = blk.eK_swap[a][b];
        ops.elastic.W.block<2, 2>(i, j) = blk.eW[a][b].transpose();
      }
    }
  }
}

void check_finite(const CMatrix& m, const char* what) {
  if (!m.allFinite()) throw AssemblyError(std::string("non-finite entries in ") + what);
}

}  // namespace

namespace detail {

std::optional<double> rotational_step(const BoundaryMesh& mesh) {
  const int n = mesh.panel_count();
  if (mesh.node_count() != n) return std::nullopt;
  for (int p = 0; p < n; ++p) {
    if (mesh.panels()[p][0] != p || mesh.panels()[p][1] != (p + 1) % n) return std::nullopt;
  }
  const double angle = 2.0 * std::numbers::pi / n;
  const Vec2 x0 = mesh.nodes()[0];
  const double radius = x0.norm();
  if (!(radius > 0.0)) return std::nullopt;
  for (int p = 0; p < n; ++p) {
    const Vec2 expected = rotation(angle * p) * x0;
    if ((mesh.nodes()[p] - expected).norm() > 1e-13 * radius) return std::nullopt;
  }
  return angle;
}

}  // namespace detail

BoundaryOperators assemble_boundary_operators(const BoundaryMesh& mesh, LaplaceFrequency s,
                                              const MaterialParams& mat,
                                              AssemblyOptions options) {
  mat.validate();
  KernelContext c;
  c.acoustic = options.acoustic;
  c.elastic = options.elastic;
  c.ka = s.value() / mat.sound_speed;
  c.kp = s.value() / mat.pressure_speed();
  c.ks = s.value() / mat.shear_speed();
  c.mu = mat.lame_mu;
  c.lambda_2mu = mat.lame_lambda + 2.0 * mat.lame_mu;
  c.rho_s2 = mat.rho_solid * s.value() * s.value();

  const int np = mesh.panel_count();
  BoundaryOperators ops;
  ops.has_acoustic = options.acoustic;
  ops.has_elastic = options.elastic;
  if (ops.has_acoustic) {
    for (CMatrix* m : {&ops.acoustic.V, &ops.acoustic.K, &ops.acoustic.W}) {
      m->setZero(2 * np, 2 * np);
    }
  }
  if (ops.has_elastic) {
    for (CMatrix* m : {&ops.elastic.V, &ops.elastic.K, &ops.elastic.W}) {
      m->setZero(4 * np, 4 * np);
    }
  }
  if (!c.acoustic && !c.elastic) return ops;

  PairBlocks blk;
  if (const auto step = detail::rotational_step(mesh)) {
    // Regular polygon: every pair is a rotated copy of a pair with p = 0.
    std::vector<Mat2> rots(np);
    for (int p = 0; p < np; ++p) rots[p] = rotation(*step * p);
    for (int q = 0; q < np; ++q) {
      if (!integrate_pair(c, mesh, 0, q, blk)) continue;
      for (int p = 0; p < np; ++p) scatter(blk, p, (q + p) % np, &rots[p], ops);
    }
  } else {
    const double quantum = 1e-11 * mesh.max_panel_length();
    std::unordered_map<PairKey, std::optional<PairBlocks>, PairKeyHash> cache;
    for (int p = 0; p < np; ++p) {
      for (int q = p; q < np; ++q) {
        const PairKey key = pair_key(mesh, p, q, quantum);
        auto it = cache.find(key);
        if (it == cache.end()) {
          std::optional<PairBlocks> val;
          if (integrate_pair(c, mesh, p, q, blk)) val = blk;
          it = cache.emplace(key, std::move(val)).first;
        }
        if (!it->second) continue;
        scatter(*it->second, p, q, nullptr, ops);
        if (q != p) scatter_swapped(*it->second, p, q, ops);
      }
    }
  }
  if (ops.has_acoustic) {
    check_finite(ops.acoustic.V, "acoustic V");
    check_finite(ops.acoustic.K, "acoustic K");
    check_finite(ops.acoustic.W, "acoustic W");
  }
  if (ops.has_elastic) {
    check_finite(ops.elastic.V, "elastic V");
    check_finite(ops.elastic.K, "elastic K");
    check_finite(ops.elastic.W, "elastic W");
  }
  return ops;
}

// ---------------------------------------------------------------------------
// Potentials

namespace {

struct PotentialContext {
  KernelContext kc;
  const BoundaryMesh* mesh;
};

// Adaptive panel integration for a target point: bisect while the point is
// close relative to the piece length.
template <class F>
void integrate_panel_adaptive(const BoundaryMesh& mesh, int q, const Vec2& x, double t0,
                              double t1, int depth, const F& f) {
  const Vec2 a = mesh.point(q, t0), b = mesh.point(q, t1);
  const double len = (t1 - t0) * mesh.length(q);
  const double d = segment_point_distance(x, a, b);
  if (d < 1.5 * len && depth < 30) {
    const double tm = 0.5 * (t0 + t1);
    integrate_panel_adaptive(mesh, q, x, t0, tm, depth + 1, f);
    integrate_panel_adaptive(mesh, q, x, tm, t1, depth + 1, f);
    return;
  }
  const auto& rule = quad::gauss(d < 4.0 * len ? 10 : 6);
  for (size_t i = 0; i < rule.x.size(); ++i) {
    const double t = t0 + (t1 - t0) * rule.x[i];
    f(t, rule.w[i] * len);
  }
}

}  // namespace

PotentialMatrices acoustic_potentials(const BoundaryMesh& mesh, std::span<const Vec2> points,
                                      cplx s_over_c) {
  const int np = mesh.panel_count();
  const int n = static_cast<int>(points.size());
  PotentialMatrices out;
  out.single.setZero(n, 2 * np);
  out.double_.setZero(n, 2 * np);
  for (int i = 0; i < n; ++i) {
    const Vec2& x = points[i];
    for (int q = 0; q < np; ++q) {
      const Vec2 nu = mesh.normal(q);
      integrate_panel_adaptive(mesh, q, x, 0.0, 1.0, 0, [&](double t, double w) {
        const Vec2 z = x - mesh.point(q, t);
        const double r = z.norm();
        if (!(r > 0.0)) throw SingularEvaluationError("acoustic potential: point on boundary");
        const auto g = detail::acoustic_radial(s_over_c, r);
        const cplx dn = -g.dg * z.dot(nu) / r;
        out.single(i, 2 * q) += w * (1.0 - t) * g.g;
        out.single(i, 2 * q + 1) += w * t * g.g;
        out.double_(i, 2 * q) += w * (1.0 - t) * dn;
        out.double_(i, 2 * q + 1) += w * t * dn;
      });
    }
  }
  return out;
}

PotentialMatrices elastic_potentials(const BoundaryMesh& mesh, std::span<const Vec2> points,
                                     LaplaceFrequency s, const MaterialParams& mat) {
  mat.validate();
  const int np = mesh.panel_count();
  const int n = static_cast<int>(points.size());
  const cplx kp = s.value() / mat.pressure_speed();
  const cplx ks = s.value() / mat.shear_speed();
  const double mu = mat.lame_mu;
  const double l2m = mat.lame_lambda + 2.0 * mat.lame_mu;
  const Mat2c J = kJ.cast<cplx>();
  PotentialMatrices out;
  out.single.setZero(2 * n, 4 * np);
  out.double_.setZero(2 * n, 4 * np);
  for (int i = 0; i < n; ++i) {
    const Vec2& x = points[i];
    for (int q = 0; q < np; ++q) {
      const PanelGeo Q = panel_geo(mesh, q);
      integrate_panel_adaptive(mesh, q, x, 0.0, 1.0, 0, [&](double t, double w) {
        const Vec2 z = x - mesh.point(q, t);
        const double r = z.norm();
        if (!(r > 0.0)) throw SingularEvaluationError("elastic potential: point on boundary");
        const Vec2 zh = z / r;
        const auto e = detail::elastic_radial(kp, ks, mu, l2m, r);
        const Mat2c E = e.a * Mat2::Identity().cast<cplx>() + e.b * (zh * zh.transpose()).cast<cplx>();
        const Vec2c gp = e.dgp * zh.cast<cplx>();
        const Vec2c gs = e.dgs * zh.cast<cplx>();
        const Mat2c A1 = (2.0 * mu) * E * J;
        const Mat2c A2 =
            -gp * Q.nu.transpose().cast<cplx>() - (J * gs) * Q.tau.transpose().cast<cplx>();
        const double ch[2] = {1.0 - t, t};
        for (int b = 0; b < 2; ++b) {
          out.single.block<2, 2>(2 * i, 4 * q + 2 * b) += (w * ch[b]) * E;
          out.double_.block<2, 2>(2 * i, 4 * q + 2 * b) += (w * Q.d[b]) * A1 + (w * ch[b]) * A2;
        }
      });
    }
  }
  return out;
}

void check_evaluation_points(const BoundaryMesh& mesh, std::span<const Vec2> points) {
  const double h = mesh.max_panel_length();
  for (size_t i = 0; i < points.size(); ++i) {
    const double d = mesh.distance_to(points[i]);
    if (d < h) {
      throw SingularEvaluationError("evaluation point " + std::to_string(i) + " lies within " +
                                    std::to_string(d) + " of the boundary (panel length " +
                                    std::to_string(h) + ")");
    }
  }
}

}  // namespace wavestruct
