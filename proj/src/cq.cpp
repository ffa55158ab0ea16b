#include "wavestruct/cq.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

namespace wavestruct::cq {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place DFT of every row of `data` (rows x length, column-major).
// sign = FFTW_FORWARD computes Σ_n x_n e^{-2πi nℓ/L}.
void dft_rows(CMatrix& data, int sign) {
  const int rows = static_cast<int>(data.rows());
  const int length = static_cast<int>(data.cols());
  if (rows == 0 || length == 0) return;
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    int n[] = {length};
    plan = fftw_plan_many_dft(1, n, rows, ptr, nullptr, rows, 1, ptr, nullptr, rows, 1, sign,
                              FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

using LMatrix = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>;

// Long double variant. solve() amplifies transform roundoff by R^{-n}, up to
// eps^{-1/2}, so the extended mantissa keeps the output near double precision.
void dft_rows(LMatrix& data, int sign) {
  const int rows = static_cast<int>(data.rows());
  const int length = static_cast<int>(data.cols());
  if (rows == 0 || length == 0) return;
  auto* ptr = reinterpret_cast<fftwl_complex*>(data.data());
  fftwl_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    int n[] = {length};
    plan = fftwl_plan_many_dft(1, n, rows, ptr, nullptr, rows, 1, ptr, nullptr, rows, 1, sign,
                               FFTW_ESTIMATE);
  }
  fftwl_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftwl_destroy_plan(plan);
}

}  // namespace

const char* to_string(Scheme scheme) { return scheme == Scheme::BDF2 ? "bdf2" : "tr"; }

Scheme parse_scheme(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "bdf2") return Scheme::BDF2;
  if (lower == "tr") return Scheme::TR;
  throw std::invalid_argument("unknown CQ scheme '" + name + "' (expected bdf2 or tr)");
}

cplx delta(Scheme scheme, cplx zeta) {
  switch (scheme) {
    case Scheme::BDF2: return 1.5 - 2.0 * zeta + 0.5 * zeta * zeta;
    case Scheme::TR:
      if (std::abs(1.0 + zeta) == 0.0) throw PoleError("TR symbol has a pole at zeta = -1");
      return 2.0 * (1.0 - zeta) / (1.0 + zeta);
  }
  return 0.0;
}

TimeGrid TimeGrid::make(double final_time, int steps) {
  if (!(final_time > 0.0) || steps < 1) {
    throw std::invalid_argument("TimeGrid: need final_time > 0 and steps >= 1");
  }
  return {final_time / steps, steps};
}

TimeSignal TimeSignal::zeros(const TimeGrid& grid, int dofs) {
  return {grid, CMatrix::Zero(dofs, grid.steps + 1)};
}

double contour_radius(int length) {
  return std::pow(std::numeric_limits<double>::epsilon(), 0.5 / length);
}

std::vector<cplx> frequencies(Scheme scheme, const TimeGrid& grid) {
  const int L = grid.steps + 1;
  const double R = contour_radius(L);
  std::vector<cplx> s(L);
  for (int l = 0; l < L; ++l) {
    const cplx zeta = std::polar(R, -2.0 * std::numbers::pi * l / L);
    s[l] = delta(scheme, zeta) / grid.step;
  }
  return s;
}

std::vector<cplx> weights(Scheme scheme, const TimeGrid& grid,
                          const std::function<cplx(cplx)>& transfer) {
  // Scalar transfers are cheap, so oversample the contour: with N = 4L points and
  // R^N = eps^0.75 both the aliasing and the R^{-n} roundoff stay near eps^0.75.
  const int L = grid.steps + 1;
  const int N = 4 * L;
  const double R = std::pow(std::numeric_limits<double>::epsilon(), 0.75 / N);
  // F(δ(ζ)/κ) = Σ ω_n ζⁿ sampled at ζ_ℓ = R e^{-2πiℓ/N}; invert the DFT.
  CMatrix f(1, N);
  for (int l = 0; l < N; ++l) {
    const cplx s = delta(scheme, std::polar(R, -2.0 * std::numbers::pi * l / N)) / grid.step;
    try {
      f(0, l) = transfer(s);
    } catch (const std::exception& e) {
      throw FrequencyError(s, std::string("transfer evaluation failed: ") + e.what());
    }
  }
  dft_rows(f, FFTW_BACKWARD);
  std::vector<cplx> w(L);
  double rn = 1.0;
  for (int n = 0; n < L; ++n) {
    w[n] = f(0, n) / (rn * N);
    rn *= R;
  }
  return w;
}

TimeSignal convolve(Scheme scheme, const TimeSignal& input,
                    const std::function<cplx(cplx)>& transfer, Diagnostics* diag) {
  const auto w = weights(scheme, input.grid, transfer);
  const int L = input.grid.steps + 1;
  if (diag) {
    diag->noncausal_input =
        input.values.cols() > 0 && input.values.col(0).cwiseAbs().maxCoeff() >
                                       1e-12 * std::max(1.0, input.values.cwiseAbs().maxCoeff());
    diag->frequency_solves = 4 * L;
  }
  TimeSignal out = TimeSignal::zeros(input.grid, input.dofs());
  for (int n = 0; n < L; ++n) {
    for (int m = 0; m <= n; ++m) out.values.col(n) += w[n - m] * input.values.col(m);
  }
  return out;
}

TimeSignal solve(Scheme scheme, const TimeSignal& rhs, const FrequencySolver& solver,
                 const SolveOptions& options, Diagnostics* diag) {
  const int L = rhs.grid.steps + 1;
  if (rhs.values.cols() != L) throw std::invalid_argument("cq::solve: rhs has wrong length");
  const long double R = std::pow(std::numeric_limits<double>::epsilon(), 0.5L / L);
  const auto s = frequencies(scheme, rhs.grid);

  LMatrix bl = rhs.values.cast<std::complex<long double>>();
  long double rn = 1.0L;
  for (int n = 0; n < L; ++n) {
    bl.col(n) *= rn;
    rn *= R;
  }
  dft_rows(bl, FFTW_FORWARD);
  const CMatrix b = bl.cast<cplx>();

  const bool real_data = rhs.values.imag().cwiseAbs().maxCoeff() == 0.0;
  const int count = real_data ? L / 2 + 1 : L;

  std::vector<CVector> results(L);
  std::atomic<int> next{0}, done{0};
  std::exception_ptr failure;
  cplx failed_s = 0.0;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const int l = next.fetch_add(1);
      if (l >= count) return;
      {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (failure) return;
      }
      try {
        results[l] = solver(s[l], b.col(l));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
          failed_s = s[l];
        }
        return;
      }
      const int d = ++done;
      if (options.progress) options.progress(d, count);
    }
  };
  const int nthreads = std::max(1, std::min(options.threads, count));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      throw FrequencyError(failed_s, "frequency solve failed at s = (" +
                                         std::to_string(failed_s.real()) + ", " +
                                         std::to_string(failed_s.imag()) + "): " + e.what());
    }
  }
  const int out_dofs = static_cast<int>(results[0].size());
  LMatrix x(out_dofs, L);
  for (int l = 0; l < count; ++l) {
    if (results[l].size() != out_dofs) {
      throw std::runtime_error("cq::solve: frequency solver returned inconsistent sizes");
    }
    x.col(l) = results[l].cast<std::complex<long double>>();
  }
  for (int l = count; l < L; ++l) x.col(l) = x.col(L - l).conjugate();
  dft_rows(x, FFTW_BACKWARD);
  TimeSignal out{rhs.grid, CMatrix(out_dofs, L)};
  rn = 1.0L;
  for (int n = 0; n < L; ++n) {
    out.values.col(n) = (x.col(n) / (rn * L)).cast<cplx>();
    rn *= R;
  }
  if (diag) {
    diag->frequency_solves = count;
    diag->used_conjugate_symmetry = real_data;
    diag->noncausal_input = rhs.values.col(0).cwiseAbs().maxCoeff() >
                            1e-12 * std::max(1.0, rhs.values.cwiseAbs().maxCoeff());
  }
  return out;
}

}  // namespace wavestruct::cq
