#pragma once

// Test helpers and independent reference implementations. Nothing here calls
// the code under test for the quantity it checks.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "luxappraise/luxappraise.hpp"

namespace testing_support {

namespace fs = std::filesystem;
namespace lx = luxappraise;

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("luxappraise-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

/// Central differences of f at x, one entry at a time.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t e = 0; e < x.size(); ++e) {
    const double keep = x[e];
    x[e] = keep + h;
    const double up = f(x);
    x[e] = keep - h;
    const double down = f(x);
    x[e] = keep;
    g[e] = (up - down) / (2.0 * h);
  }
  return g;
}

/// max_e |a_e - b_e| / max(|b_e|, floor)
inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t e = 0; e < a.size(); ++e) {
    worst = std::max(worst, std::abs(a[e] - b[e]) / std::max(std::abs(b[e]), floor));
  }
  return worst;
}

/// t-STE loss written directly from the kernel definition.
inline double reference_tste_loss(const std::vector<double>& x, std::size_t d,
                                  const std::vector<lx::IndexTriplet>& triplets, double alpha) {
  const auto kernel = [&](std::size_t a, std::size_t b) {
    double sq = 0.0;
    for (std::size_t c = 0; c < d; ++c) sq += (x[a * d + c] - x[b * d + c]) * (x[a * d + c] - x[b * d + c]);
    return std::pow(1.0 + sq / alpha, -(alpha + 1.0) / 2.0);
  };
  double loss = 0.0;
  for (const auto& t : triplets) {
    const double kij = kernel(t.i, t.j);
    const double kik = kernel(t.i, t.k);
    loss -= std::log(kij / (kij + kik));
  }
  return loss;
}

/// Mean cross-entropy plus lambda * |W without bias|^2, from the definition.
inline double reference_softmax_loss(const std::vector<double>& w, std::size_t classes, const lx::Matrix& x,
                                     const std::vector<std::size_t>& y, double lambda) {
  const std::size_t d = x.cols();
  double loss = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::vector<double> z(classes);
    for (std::size_t c = 0; c < classes; ++c) {
      z[c] = w[c * (d + 1) + d];
      for (std::size_t e = 0; e < d; ++e) z[c] += w[c * (d + 1) + e] * x(r, e);
    }
    double denom = 0.0;
    for (const double v : z) denom += std::exp(v);
    loss -= z[y[r]] - std::log(denom);
  }
  loss /= static_cast<double>(x.rows());
  double reg = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t e = 0; e < d; ++e) reg += w[c * (d + 1) + e] * w[c * (d + 1) + e];
  }
  return loss + lambda * reg;
}

inline double sort_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct ReferenceSvr {
  std::vector<double> beta;
  double bias = 0.0;
  double y_mean = 0.0;
  double y_scale = 1.0;
  double gamma = 0.0;
  lx::Matrix x;

  double predict(std::span<const double> point) const {
    double f = bias;
    for (std::size_t i = 0; i < beta.size(); ++i) {
      double sq = 0.0;
      for (std::size_t c = 0; c < point.size(); ++c) sq += (x(i, c) - point[c]) * (x(i, c) - point[c]);
      f += beta[i] * std::exp(-gamma * sq);
    }
    return f * y_scale + y_mean;
  }
};

/// Slow epsilon-SVR reference: accelerated projected gradient on the dual,
/// same target standardization as the library.
inline ReferenceSvr reference_svr(const lx::Matrix& x, const std::vector<double>& y_raw, double C, double epsilon,
                                  double gamma, std::size_t iterations = 100000) {
  const std::size_t n = x.rows();
  ReferenceSvr out;
  out.x = x;
  out.gamma = gamma;
  out.y_mean = std::accumulate(y_raw.begin(), y_raw.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (const double v : y_raw) var += (v - out.y_mean) * (v - out.y_mean);
  out.y_scale = std::sqrt(var / static_cast<double>(n));
  if (out.y_scale == 0.0) out.y_scale = 1.0;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = (y_raw[i] - out.y_mean) / out.y_scale;

  lx::Matrix K(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      double sq = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) sq += (x(a, c) - x(b, c)) * (x(a, c) - x(b, c));
      K(a, b) = std::exp(-gamma * sq);
    }
  }
  // Lipschitz constant of the smooth part: the largest eigenvalue of K,
  // bounded by its max row sum.
  double lipschitz = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b < n; ++b) s += std::abs(K(a, b));
    lipschitz = std::max(lipschitz, s);
  }
  const double step = 1.0 / lipschitz;

  // Split b = p - q with p, q >= 0 to make the objective smooth:
  //   1/2 (p-q)'K(p-q) - y'(p-q) + eps 1'(p+q),  0 <= p, q <= C,  1'p = 1'q.
  // Projected gradient on (p, q) with the coupled constraint handled by
  // projecting z = (p, -q) onto {sum = 0} intersected with the box [0,C]x[-C,0].
  std::vector<double> z(2 * n, 0.0);
  std::vector<double> z_prev = z;
  std::vector<double> v = z;
  double t = 1.0;
  const auto project = [&](const std::vector<double>& w) {
    const auto shifted_sum = [&](double mu) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += std::clamp(w[i] - mu, 0.0, C);
      for (std::size_t i = n; i < 2 * n; ++i) s += std::clamp(w[i] - mu, -C, 0.0);
      return s;
    };
    double lo = *std::min_element(w.begin(), w.end()) - 2.0 * C;
    double hi = *std::max_element(w.begin(), w.end()) + 2.0 * C;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (shifted_sum(mid) > 0.0 ? lo : hi) = mid;
    }
    const double mu = 0.5 * (lo + hi);
    std::vector<double> r(w.size());
    for (std::size_t i = 0; i < n; ++i) r[i] = std::clamp(w[i] - mu, 0.0, C);
    for (std::size_t i = n; i < 2 * n; ++i) r[i] = std::clamp(w[i] - mu, -C, 0.0);
    return r;
  };
  std::vector<double> grad(2 * n);
  for (std::size_t it = 0; it < iterations; ++it) {
    // b = p + (-q) = v[i] + v[i+n]
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = v[i] + v[i + n];
    for (std::size_t i = 0; i < n; ++i) {
      double kb = 0.0;
      for (std::size_t c = 0; c < n; ++c) kb += K(i, c) * b[c];
      grad[i] = kb - y[i] + epsilon;      // d/dp
      grad[i + n] = kb - y[i] - epsilon;  // d/d(-q)
    }
    std::vector<double> w(2 * n);
    for (std::size_t e = 0; e < 2 * n; ++e) w[e] = v[e] - 0.5 * step * grad[e];
    z = project(w);
    double moved = 0.0;
    for (std::size_t e = 0; e < 2 * n; ++e) moved = std::max(moved, std::abs(z[e] - z_prev[e]));
    if (it > 100 && moved < 1e-14) break;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t e = 0; e < 2 * n; ++e) v[e] = z[e] + ((t - 1.0) / t_next) * (z[e] - z_prev[e]);
    t = t_next;
    z_prev = z;
  }
  out.beta.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) out.beta[i] = z[i] + z[i + n];

  // Bias from the KKT conditions: a free b_i pins f(x_i) = y_i -/+ eps.
  std::vector<double> kb(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < n; ++c) kb[i] += K(i, c) * out.beta[c];
  }
  const double tol = 1e-5 * C;
  double free_sum = 0.0;
  std::size_t free_count = 0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double b = out.beta[i];
    if (b > tol && b < C - tol) {
      free_sum += y[i] - epsilon - kb[i];
      ++free_count;
    } else if (b < -tol && b > -C + tol) {
      free_sum += y[i] + epsilon - kb[i];
      ++free_count;
    } else {
      // At +C the point lies above the tube (f <= y - eps), at -C below it.
      if (b >= C - tol) upper = std::min(upper, y[i] - epsilon - kb[i]);
      if (b <= -C + tol) lower = std::max(lower, y[i] + epsilon - kb[i]);
      if (std::abs(b) <= tol) {
        lower = std::max(lower, y[i] - epsilon - kb[i]);
        upper = std::min(upper, y[i] + epsilon - kb[i]);
      }
    }
  }
  out.bias = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (lower + upper);
  return out;
}

/// Minimal world that still feeds every pipeline stage.
inline lx::WorldConfig small_world_config(std::uint64_t seed = 3) {
  lx::WorldConfig c;
  c.n_houses = 300;
  c.houzz_per_room = 24;
  c.places_per_room = 12;
  c.google_per_room = 12;
  c.seed = seed;
  return c;
}

inline lx::PipelineConfig small_pipeline_config() {
  lx::PipelineConfig c;
  c.grid_tasks_per_room = 30;
  c.labels_per_room = 40;
  c.tste_iters = 200;
  c.tune = false;
  c.room_softmax.max_iters = 150;
  c.luxury_softmax.max_iters = 150;
  return c;
}

}  // namespace testing_support
