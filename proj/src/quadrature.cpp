#include "wavestruct/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace wavestruct::quad {

namespace {

Rule1D make_gauss(int n) {
  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.x[n - 1 - i] = 0.5 * (x + 1.0);
    r.w[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

constexpr int kGradedLevels = 10;
constexpr int kGradedPoints = 6;
constexpr double kGradedRatio = 0.15;
constexpr int kSmoothPoints = 8;

Rule2D make_diagonal() {
  // For s > t: d = s - t, s = d + (1 - d) xi, t = (1 - d) xi.
  const Rule1D& rd = graded(kGradedLevels, kGradedPoints, kGradedRatio);
  const Rule1D& rx = gauss(kSmoothPoints);
  Rule2D r;
  for (size_t i = 0; i < rd.x.size(); ++i) {
    const double d = rd.x[i];
    for (size_t j = 0; j < rx.x.size(); ++j) {
      const double t = (1.0 - d) * rx.x[j];
      const double s = d + t;
      const double w = rd.w[i] * rx.w[j] * (1.0 - d);
      r.s.push_back(s);
      r.t.push_back(t);
      r.w.push_back(w);
      r.s.push_back(t);
      r.t.push_back(s);
      r.w.push_back(w);
    }
  }
  return r;
}

Rule2D make_corner() {
  // Duffy split: s > t with t = s v, and its mirror.
  const Rule1D& ru = graded(kGradedLevels, kGradedPoints, kGradedRatio);
  const Rule1D& rv = gauss(kSmoothPoints);
  Rule2D r;
  for (size_t i = 0; i < ru.x.size(); ++i) {
    const double u = ru.x[i];
    for (size_t j = 0; j < rv.x.size(); ++j) {
      const double v = u * rv.x[j];
      const double w = ru.w[i] * rv.w[j] * u;
      r.s.push_back(u);
      r.t.push_back(v);
      r.w.push_back(w);
      r.s.push_back(v);
      r.t.push_back(u);
      r.w.push_back(w);
    }
  }
  return r;
}

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

const Rule1D& gauss(int n) {
  static std::map<int, Rule1D> cache;
  std::lock_guard lock(cache_mutex());
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss(n)).first;
  return it->second;
}

const Rule1D& graded(int levels, int points_per_level, double ratio) {
  static std::map<std::tuple<int, int, double>, Rule1D> cache;
  const Rule1D& g = gauss(points_per_level);
  std::lock_guard lock(cache_mutex());
  const auto key = std::make_tuple(levels, points_per_level, ratio);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  Rule1D r;
  double hi = 1.0;
  for (int l = 0; l <= levels; ++l) {
    const double lo = (l == levels) ? 0.0 : hi * ratio;
    for (size_t i = 0; i < g.x.size(); ++i) {
      r.x.push_back(lo + (hi - lo) * g.x[i]);
      r.w.push_back((hi - lo) * g.w[i]);
    }
    hi = lo;
  }
  return cache.emplace(key, std::move(r)).first->second;
}

const Rule2D& tensor(int n) {
  static std::map<int, Rule2D> cache;
  const Rule1D& g = gauss(n);
  std::lock_guard lock(cache_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Rule2D r;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      r.s.push_back(g.x[i]);
      r.t.push_back(g.x[j]);
      r.w.push_back(g.w[i] * g.w[j]);
    }
  }
  return cache.emplace(n, std::move(r)).first->second;
}

const Rule2D& diagonal_singular() {
  static const Rule2D rule = make_diagonal();
  return rule;
}

const Rule2D& corner_singular() {
  static const Rule2D rule = make_corner();
  return rule;
}

}  // namespace wavestruct::quad
