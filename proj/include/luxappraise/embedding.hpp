#pragma once

// Student-t stochastic triplet embedding (t-STE), k-means clustering of the
// embedding, and per-cluster anchor selection.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "luxappraise/anchor_set.hpp"
#include "luxappraise/error.hpp"
#include "luxappraise/jsonl.hpp"
#include "luxappraise/matrix.hpp"
#include "luxappraise/records.hpp"
#include "luxappraise/rng.hpp"

namespace luxappraise {

/// Index-form triplet: point i is closer to j than to k.
struct IndexTriplet {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t k = 0;

  bool operator==(const IndexTriplet&) const = default;
};

struct LossAndGradient {
  double loss = 0.0;
  Matrix gradient;
};

namespace detail {

inline void check_points(const Matrix& points) {
  for (const double v : points.data()) {
    if (!std::isfinite(v)) throw ValidationError("embedding contains a non-finite coordinate");
  }
}

inline void check_triplets(std::span<const IndexTriplet> triplets, std::size_t n) {
  for (const auto& t : triplets) {
    if (t.i >= n || t.j >= n || t.k >= n) {
      throw ValidationError("triplet index out of range (" + std::to_string(t.i) + ", " + std::to_string(t.j) + ", " +
                            std::to_string(t.k) + ") for n = " + std::to_string(n));
    }
  }
}

inline double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Loss only; shares the formula with tste_loss_grad for line-search probes.
inline double tste_loss(const Matrix& x, std::span<const IndexTriplet> triplets, double alpha) {
  const double exponent = -(alpha + 1.0) / 2.0;
  double loss = 0.0;
  for (const auto& t : triplets) {
    const double log_kij = exponent * std::log1p(squared_distance(x.row(t.i), x.row(t.j)) / alpha);
    const double log_kik = exponent * std::log1p(squared_distance(x.row(t.i), x.row(t.k)) / alpha);
    loss -= log_kij - log_sum_exp(log_kij, log_kik);
  }
  return loss;
}

}  // namespace detail

/// Negative log-likelihood of the triplets under the Student-t kernel
/// K_ab = (1 + |x_a - x_b|^2 / alpha)^(-(alpha + 1) / 2), with its gradient.
inline LossAndGradient tste_loss_grad(const Matrix& points, std::span<const IndexTriplet> triplets, double alpha) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (n < 2) throw ValidationError("t-STE needs at least 2 points");
  if (!(alpha > 0.0)) throw ValidationError("alpha must be > 0");
  detail::check_points(points);
  detail::check_triplets(triplets, n);

  const double exponent = -(alpha + 1.0) / 2.0;
  const double scale = (alpha + 1.0) / alpha;
  LossAndGradient out{0.0, Matrix(n, d)};
  for (const auto& t : triplets) {
    const auto xi = points.row(t.i);
    const auto xj = points.row(t.j);
    const auto xk = points.row(t.k);
    const double dij = squared_distance(xi, xj);
    const double dik = squared_distance(xi, xk);
    const double log_kij = exponent * std::log1p(dij / alpha);
    const double log_kik = exponent * std::log1p(dik / alpha);
    const double log_p = log_kij - detail::log_sum_exp(log_kij, log_kik);
    out.loss -= log_p;

    // d(log K_ab)/dx_a = -scale * (x_a - x_b) / (1 + d_ab / alpha)
    const double q = 1.0 - std::exp(log_p);
    const double wij = scale / (1.0 + dij / alpha);
    const double wik = scale / (1.0 + dik / alpha);
    auto gi = out.gradient.row(t.i);
    auto gj = out.gradient.row(t.j);
    auto gk = out.gradient.row(t.k);
    for (std::size_t c = 0; c < d; ++c) {
      const double a = q * wij * (xi[c] - xj[c]);
      const double b = q * wik * (xi[c] - xk[c]);
      gi[c] += a - b;
      gj[c] -= a;
      gk[c] += b;
    }
  }
  return out;
}

struct TsteConfig {
  std::size_t max_iters = 1000;
  double learning_rate = 1.0;
  std::uint64_t seed = 0;
};

struct Embedding {
  std::vector<std::string> photo_ids;
  Matrix points;
  double alpha = 1.0;
  double final_loss = 0.0;
  double initial_loss = 0.0;
  /// Best loss after each iteration (index 0 = initialization).
  std::vector<double> loss_trace;
  /// Row indices that appear in no triplet; left at their initialization.
  std::vector<std::size_t> isolated;

  bool operator==(const Embedding&) const = default;
};

/// Full-batch gradient descent. A step that increases the loss is retried
/// at half the step size; an accepted step grows the next step by 10%.
inline Embedding tste_fit(std::span<const IndexTriplet> triplets, std::size_t n, std::size_t d, double alpha,
                          const TsteConfig& config) {
  if (triplets.empty()) throw ValidationError("t-STE needs a nonempty triplet list");
  if (d == 0) throw ValidationError("embedding dimension must be >= 1");
  detail::check_triplets(triplets, n);

  Embedding result;
  result.alpha = alpha;
  result.points = Matrix(n, d);
  Rng rng(derive_seed(config.seed, "tste-init"));
  for (auto& v : result.points.data()) v = rng.normal(0.0, 0.01);

  std::vector<bool> used(n, false);
  for (const auto& t : triplets) used[t.i] = used[t.j] = used[t.k] = true;
  for (std::size_t r = 0; r < n; ++r) {
    if (!used[r]) result.isolated.push_back(r);
  }

  Matrix x = result.points;
  auto current = tste_loss_grad(x, triplets, alpha);
  result.initial_loss = current.loss;
  result.loss_trace.push_back(current.loss);
  double step = config.learning_rate;
  Matrix candidate(n, d);
  for (std::size_t iter = 0; iter < config.max_iters && step > 1e-12; ++iter) {
    bool accepted = false;
    while (step > 1e-12) {
      for (std::size_t e = 0; e < x.data().size(); ++e) {
        candidate.data()[e] = x.data()[e] - step * current.gradient.data()[e];
      }
      const double loss = detail::tste_loss(candidate, triplets, alpha);
      if (std::isfinite(loss) && loss <= current.loss) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double previous = current.loss;
    x = candidate;
    current = tste_loss_grad(x, triplets, alpha);
    result.loss_trace.push_back(current.loss);
    step *= 1.1;
    if (previous - current.loss <= 1e-12 * std::max(1.0, std::abs(previous))) break;
  }
  result.points = std::move(x);
  result.final_loss = current.loss;
  return result;
}

/// Fraction of triplets with |x_i - x_j| < |x_i - x_k|; ties are unsatisfied.
inline double triplet_satisfaction(const Matrix& points, std::span<const IndexTriplet> triplets) {
  detail::check_triplets(triplets, points.rows());
  if (triplets.empty()) return 0.0;
  std::size_t satisfied = 0;
  for (const auto& t : triplets) {
    if (squared_distance(points.row(t.i), points.row(t.j)) < squared_distance(points.row(t.i), points.row(t.k))) {
      ++satisfied;
    }
  }
  return static_cast<double>(satisfied) / static_cast<double>(triplets.size());
}

inline double triplet_satisfaction(const Embedding& embedding, std::span<const IndexTriplet> triplets) {
  return triplet_satisfaction(embedding.points, triplets);
}

/// Maps id-form triplets onto sorted unique photo ids.
struct IndexedTriplets {
  std::vector<std::string> photo_ids;
  std::vector<IndexTriplet> triplets;
};

inline IndexedTriplets index_triplets(std::span<const Triplet> triplets) {
  std::set<std::string> ids;
  for (const auto& t : triplets) {
    validate(t);
    ids.insert(t.probe);
    ids.insert(t.similar);
    ids.insert(t.dissimilar);
  }
  IndexedTriplets out;
  out.photo_ids.assign(ids.begin(), ids.end());
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < out.photo_ids.size(); ++r) index.emplace(out.photo_ids[r], r);
  out.triplets.reserve(triplets.size());
  for (const auto& t : triplets) out.triplets.push_back({index.at(t.probe), index.at(t.similar), index.at(t.dissimilar)});
  return out;
}

/// Embeds the photos named in id-form triplets; rows follow sorted photo ids.
inline Embedding fit_embedding(std::span<const Triplet> triplets, std::size_t d, double alpha, const TsteConfig& config) {
  auto indexed = index_triplets(triplets);
  if (indexed.photo_ids.size() < 2) throw ValidationError("t-STE needs at least 2 distinct photos");
  auto embedding = tste_fit(indexed.triplets, indexed.photo_ids.size(), d, alpha, config);
  embedding.photo_ids = std::move(indexed.photo_ids);
  return embedding;
}

// ---------------------------------------------------------------------------
// k-means

struct KMeansResult {
  std::vector<std::size_t> assignments;
  Matrix centroids;
  /// Within-cluster sum of squares after each Lloyd update.
  std::vector<double> wcss_trace;
  std::size_t iterations = 0;
};

inline double within_cluster_ss(const Matrix& points, const std::vector<std::size_t>& assignments,
                                const Matrix& centroids) {
  double total = 0.0;
  for (std::size_t r = 0; r < points.rows(); ++r) total += squared_distance(points.row(r), centroids.row(assignments[r]));
  return total;
}

/// k-means++ seeding followed by Lloyd iterations until assignments settle.
inline KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iters = 300) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (k < 1) throw ValidationError("k must be >= 1");
  if (n < k) throw ValidationError("k-means needs n >= k (n = " + std::to_string(n) + ", k = " + std::to_string(k) + ")");

  Rng rng(derive_seed(seed, "kmeans++"));
  KMeansResult result;
  result.centroids = Matrix(k, d);
  std::vector<bool> chosen(n, false);
  std::size_t first = static_cast<std::size_t>(rng.below(n));
  chosen[first] = true;
  std::copy_n(points.row(first).begin(), d, result.centroids.row(0).begin());
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      nearest[r] = std::min(nearest[r], squared_distance(points.row(r), result.centroids.row(c - 1)));
      total += nearest[r];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (std::size_t r = 0; r < n; ++r) {
        if (nearest[r] <= 0.0) continue;
        pick = r;
        target -= nearest[r];
        if (target < 0.0) break;
      }
    }
    if (pick == n) {
      // All remaining points coincide with a centroid.
      pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
    }
    chosen[pick] = true;
    std::copy_n(points.row(pick).begin(), d, result.centroids.row(c).begin());
  }

  result.assignments.assign(n, k);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (std::size_t r = 0; r < n; ++r) {
      std::size_t best = 0;
      double best_d = squared_distance(points.row(r), result.centroids.row(0));
      for (std::size_t c = 1; c < k; ++c) {
        const double dist = squared_distance(points.row(r), result.centroids.row(c));
        if (dist < best_d) {
          best_d = dist;
          best = c;
        }
      }
      if (result.assignments[r] != best) {
        result.assignments[r] = best;
        changed = true;
      }
    }

    std::vector<std::size_t> counts(k, 0);
    for (const auto a : result.assignments) ++counts[a];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      // Repair: move the point farthest from its centroid into the empty cluster.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t r = 0; r < n; ++r) {
        if (counts[result.assignments[r]] <= 1) continue;
        const double dist = squared_distance(points.row(r), result.centroids.row(result.assignments[r]));
        if (dist > far_d) {
          far_d = dist;
          far = r;
        }
      }
      --counts[result.assignments[far]];
      result.assignments[far] = c;
      counts[c] = 1;
      changed = true;
    }

    Matrix sums(k, d);
    for (std::size_t r = 0; r < n; ++r) {
      auto row = sums.row(result.assignments[r]);
      const auto p = points.row(r);
      for (std::size_t c = 0; c < d; ++c) row[c] += p[c];
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t e = 0; e < d; ++e) result.centroids(c, e) = sums(c, e) / static_cast<double>(counts[c]);
    }
    result.wcss_trace.push_back(within_cluster_ss(points, result.assignments, result.centroids));
    result.iterations = iter + 1;
    if (!changed) break;
  }
  return result;
}

/// One anchor per cluster (the member nearest its centroid, ties to the
/// smaller photo id); clusters become levels 1..8 by ascending mean proxy.
inline AnchorSet select_anchors(const Embedding& embedding, const std::vector<std::size_t>& assignments,
                                const Matrix& centroids, const std::map<std::string, double>& luxury_proxy,
                                RoomCategory room) {
  const std::size_t k = centroids.rows();
  if (k != static_cast<std::size_t>(LuxuryLevel::kCount)) {
    throw ValidationError("anchor selection needs exactly 8 clusters, got " + std::to_string(k));
  }
  if (assignments.size() != embedding.photo_ids.size()) throw ValidationError("assignments do not match embedding");

  std::vector<double> proxy_sum(k, 0.0);
  std::vector<std::size_t> counts(k, 0);
  std::vector<std::size_t> anchor(k, embedding.photo_ids.size());
  std::vector<double> anchor_d(k, std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < assignments.size(); ++r) {
    const std::size_t c = assignments[r];
    if (c >= k) throw ValidationError("assignment out of range");
    const auto& id = embedding.photo_ids[r];
    const auto it = luxury_proxy.find(id);
    if (it == luxury_proxy.end()) throw ValidationError("no luxury proxy value for photo " + id);
    proxy_sum[c] += it->second;
    ++counts[c];
    const double dist = std::sqrt(squared_distance(embedding.points.row(r), centroids.row(c)));
    if (dist < anchor_d[c] || (dist == anchor_d[c] && id < embedding.photo_ids[anchor[c]])) {
      anchor_d[c] = dist;
      anchor[c] = r;
    }
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) throw ValidationError("cluster " + std::to_string(c) + " is empty");
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return proxy_sum[a] / static_cast<double>(counts[a]) < proxy_sum[b] / static_cast<double>(counts[b]);
  });

  AnchorSet set;
  set.room = room;
  for (std::size_t level = 0; level < k; ++level) {
    const std::size_t c = order[level];
    set.anchors[level] = embedding.photo_ids[anchor[c]];
    set.centroids[level].assign(centroids.row(c).begin(), centroids.row(c).end());
  }
  validate(set);
  return set;
}

// ---------------------------------------------------------------------------
// Persistence: one line per photo, {room?, photo_id, coords}.

inline std::vector<Json> embedding_lines(const Embedding& embedding, const std::optional<RoomCategory>& room) {
  std::vector<Json> lines;
  lines.reserve(embedding.photo_ids.size());
  for (std::size_t r = 0; r < embedding.photo_ids.size(); ++r) {
    Json j;
    if (room) j["room"] = std::string(to_string(*room));
    j["photo_id"] = embedding.photo_ids[r];
    const auto row = embedding.points.row(r);
    j["coords"] = std::vector<double>(row.begin(), row.end());
    lines.push_back(std::move(j));
  }
  return lines;
}

}  // namespace luxappraise
