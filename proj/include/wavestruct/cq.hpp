#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace wavestruct::cq {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

enum class Scheme { BDF2, TR };

const char* to_string(Scheme scheme);
/// Accepts "bdf2" and "tr" (case-insensitive).
Scheme parse_scheme(const std::string& name);

class PoleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Failure of a frequency-domain evaluation inside a CQ run.
class FrequencyError : public std::runtime_error {
 public:
  FrequencyError(cplx s, const std::string& what) : std::runtime_error(what), s_(s) {}
  cplx frequency() const { return s_; }

 private:
  cplx s_;
};

/// Generating symbol: BDF2 3/2 - 2ζ + ζ²/2, TR 2(1-ζ)/(1+ζ).
cplx delta(Scheme scheme, cplx zeta);

struct TimeGrid {
  double step = 0.0;  // κ
  int steps = 0;      // M; times t_n = n κ for n = 0..M

  static TimeGrid make(double final_time, int steps);
  double time(int n) const { return n * step; }
  double final_time() const { return steps * step; }
};

/// values(dof, n) at time t_n; M+1 columns.
struct TimeSignal {
  TimeGrid grid;
  CMatrix values;

  static TimeSignal zeros(const TimeGrid& grid, int dofs);
  int dofs() const { return static_cast<int>(values.rows()); }
};

/// Contour radius used for a transform of length L = M+1: R^L = sqrt(eps).
double contour_radius(int length);

/// Laplace frequencies s_ℓ = δ(R e^{-2πiℓ/L}) / κ, ℓ = 0..L-1.
std::vector<cplx> frequencies(Scheme scheme, const TimeGrid& grid);

/// CQ weights ω_0..ω_M of a scalar transfer function F (oversampled contour,
/// accurate to about eps^0.75 relative to the largest weight).
std::vector<cplx> weights(Scheme scheme, const TimeGrid& grid,
                          const std::function<cplx(cplx)>& transfer);

struct Diagnostics {
  bool noncausal_input = false;  // some input value at n = 0 exceeded the tolerance
  int frequency_solves = 0;
  bool used_conjugate_symmetry = false;
};

/// Forward CQ for a scalar transfer function: out_n = Σ_{m<=n} ω_{n-m} in_m.
TimeSignal convolve(Scheme scheme, const TimeSignal& input,
                    const std::function<cplx(cplx)>& transfer, Diagnostics* diag = nullptr);

/// Maps (s, Laplace-domain data) to the Laplace-domain output. Must be reentrant
/// when threads > 1 and satisfy F(conj s, conj b) = conj F(s, b).
using FrequencySolver = std::function<CVector(cplx, const CVector&)>;

struct SolveOptions {
  int threads = 1;
  /// Called after each frequency solve (from worker threads) with the count done.
  std::function<void(int done, int total)> progress;
};

/// All-steps-at-once CQ: scaled DFT of the right-hand side, independent frequency
/// solves, inverse DFT. Real right-hand sides use conjugate symmetry and solve
/// only ℓ = 0..⌊L/2⌋. The output does not depend on the number of threads.
TimeSignal solve(Scheme scheme, const TimeSignal& rhs, const FrequencySolver& solver,
                 const SolveOptions& options = {}, Diagnostics* diag = nullptr);

}  // namespace wavestruct::cq
