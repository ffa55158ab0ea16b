#pragma once

#include <vector>

namespace wavestruct::quad {

struct Rule1D {
  std::vector<double> x;  // nodes on [0, 1]
  std::vector<double> w;  // weights summing to 1
};

/// Gauss-Legendre rule with n points mapped to [0, 1]. Cached; thread-safe.
const Rule1D& gauss(int n);

/// Composite Gauss rule on [0, 1] refined geometrically towards 0, suitable for
/// integrands with a log (or weaker) singularity at the origin.
const Rule1D& graded(int levels, int points_per_level, double ratio);

/// Points (s, t) in [0,1]^2 with weights. The rules built here are symmetric
/// under (s, t) -> (t, s): every node appears together with its mirror image
/// and the same weight.
struct Rule2D {
  std::vector<double> s, t, w;
  int size() const { return static_cast<int>(w.size()); }
};

/// Tensor Gauss rule.
const Rule2D& tensor(int n);

/// Rule for an integrand singular along the diagonal s = t (same-panel pairs).
const Rule2D& diagonal_singular();

/// Rule for an integrand singular at the corner (0, 0) (panels sharing a vertex,
/// both parametrised from the shared vertex).
const Rule2D& corner_singular();

}  // namespace wavestruct::quad
