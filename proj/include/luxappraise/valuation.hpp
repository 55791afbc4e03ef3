#pragma once

// House price estimation: per-room luxury aggregation with imputation,
// z-scored metadata, concatenated representations and an RBF-kernel
// epsilon-SVR solved in the dual by a two-variable working-set method.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "luxappraise/error.hpp"
#include "luxappraise/jsonl.hpp"
#include "luxappraise/matrix.hpp"
#include "luxappraise/metrics.hpp"
#include "luxappraise/records.hpp"
#include "luxappraise/rng.hpp"

namespace luxappraise {

// ---------------------------------------------------------------------------
// Metadata z-scoring

struct Normalizer {
  std::array<double, kMetadataFields> means{};
  /// Population standard deviations.
  std::array<double, kMetadataFields> stds{};
  std::array<bool, kMetadataFields> degenerate{};

  bool operator==(const Normalizer&) const = default;
};

inline Normalizer fit_normalizer(std::span<const MetadataVector> rows) {
  if (rows.size() < 2) throw ValidationError("normalizer needs at least 2 rows, got " + std::to_string(rows.size()));
  Normalizer n;
  const double count = static_cast<double>(rows.size());
  for (const auto& m : rows) {
    const auto v = m.values();
    for (std::size_t f = 0; f < kMetadataFields; ++f) n.means[f] += v[f];
  }
  for (auto& mean : n.means) mean /= count;
  for (const auto& m : rows) {
    const auto v = m.values();
    for (std::size_t f = 0; f < kMetadataFields; ++f) {
      const double d = v[f] - n.means[f];
      n.stds[f] += d * d;
    }
  }
  for (std::size_t f = 0; f < kMetadataFields; ++f) {
    n.stds[f] = std::sqrt(n.stds[f] / count);
    n.degenerate[f] = n.stds[f] == 0.0;
  }
  return n;
}

/// (m_f - mean_f) / std_f per field; degenerate fields map to 0.
inline std::array<double, kMetadataFields> normalize(const Normalizer& normalizer, const MetadataVector& m) {
  std::array<double, kMetadataFields> z{};
  const auto v = m.values();
  for (std::size_t f = 0; f < kMetadataFields; ++f) {
    z[f] = normalizer.degenerate[f] ? 0.0 : (v[f] - normalizer.means[f]) / normalizer.stds[f];
  }
  return z;
}

// ---------------------------------------------------------------------------
// Per-house luxury

inline constexpr double kNoPhotoLuxury = 4.5;

struct LuxuryVector {
  /// Mean level per room, in kAllRooms order.
  std::array<double, kRoomCount> values{};
  std::array<bool, kRoomCount> imputed{};

  bool operator==(const LuxuryVector&) const = default;
};

struct PhotoPrediction {
  RoomCategory room;
  LuxuryLevel level;
};

using PhotoPredictions = std::map<std::string, PhotoPrediction>;

/// Per-room mean level; rooms without photos get the mean of the observed
/// room means. A house with no photos gets 4.5 everywhere.
inline LuxuryVector aggregate_house_luxury(const HouseRecord& house, const PhotoPredictions& photo_levels) {
  std::array<double, kRoomCount> sums{};
  std::array<std::size_t, kRoomCount> counts{};
  for (const auto& pid : house.photo_ids) {
    const auto it = photo_levels.find(pid);
    if (it == photo_levels.end()) throw ValidationError("no room/level prediction for photo " + pid);
    const auto r = room_index(it->second.room);
    sums[r] += it->second.level.value();
    ++counts[r];
  }
  LuxuryVector out;
  double observed_sum = 0.0;
  std::size_t observed = 0;
  for (std::size_t r = 0; r < kRoomCount; ++r) {
    if (counts[r] == 0) continue;
    out.values[r] = sums[r] / static_cast<double>(counts[r]);
    observed_sum += out.values[r];
    ++observed;
  }
  const double fill = observed > 0 ? observed_sum / static_cast<double>(observed) : kNoPhotoLuxury;
  for (std::size_t r = 0; r < kRoomCount; ++r) {
    if (counts[r] != 0) continue;
    out.values[r] = fill;
    out.imputed[r] = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Representations

enum class RepresentationMode { kFull, kMetadataOnly, kNoRoomClassifier, kDirectRegression };

inline constexpr std::array<RepresentationMode, 4> kAllModes = {
    RepresentationMode::kFull, RepresentationMode::kMetadataOnly, RepresentationMode::kNoRoomClassifier,
    RepresentationMode::kDirectRegression};

constexpr std::string_view to_string(RepresentationMode mode) {
  switch (mode) {
    case RepresentationMode::kFull:
      return "full";
    case RepresentationMode::kMetadataOnly:
      return "metadata_only";
    case RepresentationMode::kNoRoomClassifier:
      return "no_room_classifier";
    case RepresentationMode::kDirectRegression:
      return "direct_regression";
  }
  return "?";
}

inline RepresentationMode parse_mode(std::string_view name) {
  for (const auto mode : kAllModes) {
    if (to_string(mode) == name) return mode;
  }
  throw ValidationError("unknown representation mode '" + std::string(name) + "'");
}

inline std::size_t representation_length(RepresentationMode mode, std::size_t feature_dim) {
  switch (mode) {
    case RepresentationMode::kFull:
      return kMetadataFields + kRoomCount;
    case RepresentationMode::kMetadataOnly:
      return kMetadataFields;
    case RepresentationMode::kNoRoomClassifier:
      return kMetadataFields + 1;
    case RepresentationMode::kDirectRegression:
      return kMetadataFields + feature_dim;
  }
  return 0;
}

/// Mode-specific inputs beyond the metadata. Only the field the mode needs
/// may be set.
struct RepresentationInputs {
  std::optional<LuxuryVector> luxury;
  /// Mean level from the room-agnostic luxury model over all house photos.
  std::optional<double> pooled_luxury;
  /// Raw feature vectors of the house's photos, plus their dimension.
  std::optional<std::vector<std::vector<double>>> photo_features;
  std::size_t feature_dim = 0;
};

struct HouseRepresentation {
  std::vector<double> vector;
  RepresentationMode mode = RepresentationMode::kFull;
};

/// Mean predicted level over a house's photos (4.5 when it has none).
inline double pooled_luxury(std::span<const LuxuryLevel> levels) {
  if (levels.empty()) return kNoPhotoLuxury;
  double sum = 0.0;
  for (const auto l : levels) sum += l.value();
  return sum / static_cast<double>(levels.size());
}

inline HouseRepresentation build_representation(const HouseRecord& house, const Normalizer& normalizer,
                                                RepresentationMode mode, const RepresentationInputs& inputs) {
  HouseRepresentation rep;
  rep.mode = mode;
  const auto z = normalize(normalizer, house.metadata);
  rep.vector.assign(z.begin(), z.end());
  const auto mismatch = [&](const char* what) {
    return ValidationError("house " + house.id + ": mode " + std::string(to_string(mode)) + " " + what);
  };
  switch (mode) {
    case RepresentationMode::kFull:
      if (!inputs.luxury) throw mismatch("needs a luxury vector");
      if (inputs.pooled_luxury || inputs.photo_features) throw mismatch("takes only a luxury vector");
      rep.vector.insert(rep.vector.end(), inputs.luxury->values.begin(), inputs.luxury->values.end());
      break;
    case RepresentationMode::kMetadataOnly:
      if (inputs.luxury || inputs.pooled_luxury || inputs.photo_features) throw mismatch("takes no photo inputs");
      break;
    case RepresentationMode::kNoRoomClassifier:
      if (!inputs.pooled_luxury) throw mismatch("needs a pooled luxury value");
      if (inputs.luxury || inputs.photo_features) throw mismatch("takes only a pooled luxury value");
      rep.vector.push_back(*inputs.pooled_luxury);
      break;
    case RepresentationMode::kDirectRegression: {
      if (!inputs.photo_features) throw mismatch("needs photo features");
      if (inputs.luxury || inputs.pooled_luxury) throw mismatch("takes only photo features");
      std::vector<double> pooled(inputs.feature_dim, 0.0);
      for (const auto& f : *inputs.photo_features) {
        if (f.size() != inputs.feature_dim) throw mismatch("got a photo feature vector of the wrong length");
        for (std::size_t e = 0; e < f.size(); ++e) pooled[e] += f[e];
      }
      if (!inputs.photo_features->empty()) {
        for (auto& v : pooled) v /= static_cast<double>(inputs.photo_features->size());
      }
      rep.vector.insert(rep.vector.end(), pooled.begin(), pooled.end());
      break;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// epsilon-SVR

struct SvrParams {
  double C = 10.0;
  double epsilon = 0.1;
  double gamma = 0.1;

  bool operator==(const SvrParams&) const = default;
};

struct SvrOptions {
  double tolerance = 1e-3;
  /// 0 picks max(10^7, 100 n).
  std::size_t max_iterations = 0;
  /// Temporarily drop bounded variables that are unlikely to move.
  bool shrinking = true;
};

struct SvrModel {
  Matrix support_vectors;
  /// alpha - alpha* per support vector, in [-C, C].
  std::vector<double> coefficients;
  /// Decision value is sum coef * K - rho, in standardized target units.
  double rho = 0.0;
  SvrParams params;
  double y_mean = 0.0;
  double y_scale = 1.0;
  bool converged = true;
  double kkt_violation = 0.0;
  std::size_t iterations = 0;

  std::size_t dim() const { return support_vectors.cols(); }
  bool operator==(const SvrModel&) const = default;
};

inline double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  return std::exp(-gamma * squared_distance(a, b));
}

namespace detail {

// Kernel rows over the training set: precomputed for small n, on demand otherwise.
class KernelRows {
 public:
  KernelRows(const Matrix& x, double gamma) : x_(x), gamma_(gamma), n_(x.rows()) {
    if (n_ <= kFullLimit) {
      full_.resize(n_ * n_);
      for (std::size_t a = 0; a < n_; ++a) {
        full_[a * n_ + a] = 1.0;
        for (std::size_t b = a + 1; b < n_; ++b) {
          const double k = rbf_kernel(x_.row(a), x_.row(b), gamma_);
          full_[a * n_ + b] = k;
          full_[b * n_ + a] = k;
        }
      }
    } else {
      scratch_[0].resize(n_);
      scratch_[1].resize(n_);
    }
  }

  /// Row `a`; slot selects one of two scratch buffers when computed on demand.
  std::span<const double> row(std::size_t a, int slot) {
    if (!full_.empty()) return {full_.data() + a * n_, n_};
    auto& buffer = scratch_[slot];
    for (std::size_t b = 0; b < n_; ++b) buffer[b] = rbf_kernel(x_.row(a), x_.row(b), gamma_);
    return buffer;
  }

 private:
  static constexpr std::size_t kFullLimit = 5000;
  const Matrix& x_;
  double gamma_;
  std::size_t n_;
  std::vector<double> full_;
  std::array<std::vector<double>, 2> scratch_;
};

}  // namespace detail

/// Solves the epsilon-SVR dual over 2n variables (alpha, alpha*) with
/// second-order working-set selection. Targets are standardized internally;
/// C and epsilon are in standardized units.
inline SvrModel svr_fit(const Matrix& x, std::span<const double> y, const SvrParams& params,
                        const SvrOptions& options = {}) {
  const std::size_t n = x.rows();
  if (n < 2 || y.size() != n) throw ValidationError("svr_fit needs |X| = |y| >= 2");
  if (!(params.C > 0.0) || !(params.gamma > 0.0) || !(params.epsilon >= 0.0)) {
    throw ValidationError("SVR needs C > 0, gamma > 0, epsilon >= 0");
  }
  for (const double v : x.data()) {
    if (!std::isfinite(v)) throw ValidationError("non-finite SVR input");
  }
  for (const double v : y) {
    if (!std::isfinite(v)) throw ValidationError("non-finite SVR target");
  }

  SvrModel model;
  model.params = params;
  model.y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (const double v : y) var += (v - model.y_mean) * (v - model.y_mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  model.y_scale = sd > 0.0 ? sd : 1.0;
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = (y[i] - model.y_mean) / model.y_scale;

  // Variables [0, n) are alpha (sign +1), [n, 2n) alpha* (sign -1);
  // grad = p + Q beta with Q_st = sign_s sign_t K(s mod n, t mod n).
  const std::size_t m = 2 * n;
  const double C = params.C;
  std::vector<double> beta(m, 0.0);
  std::vector<double> p(m);
  for (std::size_t c = 0; c < n; ++c) {
    p[c] = params.epsilon - target[c];
    p[c + n] = params.epsilon + target[c];
  }
  std::vector<double> grad = p;
  // Contribution of variables at the upper bound: sum over beta_s = C of C Q_ts.
  std::vector<double> g_bar(m, 0.0);
  std::vector<std::size_t> active(m);
  std::iota(active.begin(), active.end(), std::size_t{0});
  const auto sign_of = [n](std::size_t t) { return t < n ? 1.0 : -1.0; };
  detail::KernelRows kernel(x, params.gamma);
  const std::size_t max_iter =
      options.max_iterations != 0 ? options.max_iterations : std::max<std::size_t>(10000000, 100 * n);
  constexpr double kTau = 1e-12;

  // Maximal violating pair over the active set: i by first order, j by
  // second-order gain (grad_diff^2 / quad, compared without dividing).
  std::size_t i = m;
  std::size_t j = m;
  double g_max = 0.0;
  double g_max2 = 0.0;
  const auto select = [&]() -> bool {
    g_max = -std::numeric_limits<double>::infinity();
    g_max2 = -std::numeric_limits<double>::infinity();
    i = m;
    j = m;
    for (const std::size_t t : active) {
      if (t < n) {
        if (beta[t] < C && -grad[t] >= g_max) {
          g_max = -grad[t];
          i = t;
        }
      } else if (beta[t] > 0.0 && grad[t] >= g_max) {
        g_max = grad[t];
        i = t;
      }
    }
    if (i == m) return false;
    const auto k_i = kernel.row(i % n, 0);
    double best_gain = -1.0;
    double best_quad = 1.0;
    for (const std::size_t t : active) {
      double grad_diff = 0.0;
      if (t < n) {
        if (!(beta[t] > 0.0)) continue;
        g_max2 = std::max(g_max2, grad[t]);
        grad_diff = g_max + grad[t];
      } else {
        if (!(beta[t] < C)) continue;
        g_max2 = std::max(g_max2, -grad[t]);
        grad_diff = g_max - grad[t];
      }
      if (grad_diff <= 0.0) continue;
      // Q_ii + Q_tt - 2 y_i Q_it = 2 - 2 K_it for either half.
      double quad = 2.0 - 2.0 * k_i[t % n];
      if (quad <= 0.0) quad = kTau;
      const double gain = grad_diff * grad_diff;
      if (gain * best_quad >= best_gain * quad) {
        best_gain = gain;
        best_quad = quad;
        j = t;
      }
    }
    return j != m && g_max + g_max2 >= options.tolerance;
  };

  const auto reconstruct_gradient = [&]() {
    if (active.size() == m) return;
    std::vector<char> is_active(m, 0);
    for (const std::size_t t : active) is_active[t] = 1;
    std::vector<std::size_t> inactive;
    for (std::size_t t = 0; t < m; ++t) {
      if (!is_active[t]) {
        inactive.push_back(t);
        grad[t] = g_bar[t] + p[t];
      }
    }
    // Shrunk variables sit at a bound, so every free variable is active.
    for (const std::size_t s : active) {
      if (!(beta[s] > 0.0 && beta[s] < C)) continue;
      const auto k_s = kernel.row(s % n, 0);
      const double a = sign_of(s) * beta[s];
      for (const std::size_t t : inactive) grad[t] += sign_of(t) * a * k_s[t % n];
    }
    active.resize(m);
    std::iota(active.begin(), active.end(), std::size_t{0});
  };

  bool unshrunk = false;
  const auto shrink = [&]() {
    double gm1 = -std::numeric_limits<double>::infinity();
    double gm2 = -std::numeric_limits<double>::infinity();
    for (const std::size_t t : active) {
      if (t < n) {
        if (beta[t] < C) gm1 = std::max(gm1, -grad[t]);
        if (beta[t] > 0.0) gm2 = std::max(gm2, grad[t]);
      } else {
        if (beta[t] > 0.0) gm1 = std::max(gm1, grad[t]);
        if (beta[t] < C) gm2 = std::max(gm2, -grad[t]);
      }
    }
    if (!unshrunk && gm1 + gm2 <= options.tolerance * 10.0) {
      unshrunk = true;
      reconstruct_gradient();
    }
    const auto removable = [&](std::size_t t) {
      const bool plus = t < n;
      if (beta[t] >= C) return -grad[t] > (plus ? gm1 : gm2);
      if (beta[t] <= 0.0) return grad[t] > (plus ? gm2 : gm1);
      return false;
    };
    std::erase_if(active, removable);
  };

  const std::size_t shrink_every = std::min<std::size_t>(n, 1000);
  std::size_t counter = shrink_every;
  std::size_t iter = 0;
  model.converged = false;
  for (; iter < max_iter; ++iter) {
    if (options.shrinking && --counter == 0) {
      counter = shrink_every;
      shrink();
    }
    if (!select()) {
      if (active.size() == m) {
        model.converged = true;
        break;
      }
      reconstruct_gradient();
      if (!select()) {
        model.converged = true;
        break;
      }
      counter = 1;
    }

    const auto k_i = kernel.row(i % n, 0);
    const auto k_j = kernel.row(j % n, 1);
    const double q_ij = sign_of(i) * sign_of(j) * k_i[j % n];
    const double old_i = beta[i];
    const double old_j = beta[j];
    if (sign_of(i) != sign_of(j)) {
      double quad = 2.0 + 2.0 * q_ij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = beta[i] - beta[j];
      beta[i] += delta;
      beta[j] += delta;
      if (diff > 0.0) {
        if (beta[j] < 0.0) {
          beta[j] = 0.0;
          beta[i] = diff;
        }
      } else if (beta[i] < 0.0) {
        beta[i] = 0.0;
        beta[j] = -diff;
      }
      if (diff > 0.0) {
        if (beta[i] > C) {
          beta[i] = C;
          beta[j] = C - diff;
        }
      } else if (beta[j] > C) {
        beta[j] = C;
        beta[i] = C + diff;
      }
    } else {
      double quad = 2.0 - 2.0 * q_ij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = beta[i] + beta[j];
      beta[i] -= delta;
      beta[j] += delta;
      if (sum > C) {
        if (beta[i] > C) {
          beta[i] = C;
          beta[j] = sum - C;
        }
      } else if (beta[j] < 0.0) {
        beta[j] = 0.0;
        beta[i] = sum;
      }
      if (sum > C) {
        if (beta[j] > C) {
          beta[j] = C;
          beta[i] = sum - C;
        }
      } else if (beta[i] < 0.0) {
        beta[i] = 0.0;
        beta[j] = sum;
      }
    }
    const double a_i = sign_of(i) * (beta[i] - old_i);
    const double a_j = sign_of(j) * (beta[j] - old_j);
    for (const std::size_t t : active) {
      const std::size_t c = t < n ? t : t - n;
      grad[t] += sign_of(t) * (k_i[c] * a_i + k_j[c] * a_j);
    }
    for (const auto& [v, old, k] : {std::tuple{i, old_i, k_i}, std::tuple{j, old_j, k_j}}) {
      const bool was_upper = old >= C;
      if (was_upper == (beta[v] >= C)) continue;
      const double a = (was_upper ? -C : C) * sign_of(v);
      for (std::size_t c = 0; c < n; ++c) {
        g_bar[c] += a * k[c];
        g_bar[c + n] -= a * k[c];
      }
    }
  }
  if (options.shrinking) reconstruct_gradient();
  double violation = 0.0;
  {
    double gm1 = -std::numeric_limits<double>::infinity();
    double gm2 = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < m; ++t) {
      if (t < n) {
        if (beta[t] < C) gm1 = std::max(gm1, -grad[t]);
        if (beta[t] > 0.0) gm2 = std::max(gm2, grad[t]);
      } else {
        if (beta[t] > 0.0) gm1 = std::max(gm1, grad[t]);
        if (beta[t] < C) gm2 = std::max(gm2, -grad[t]);
      }
    }
    violation = std::max(0.0, gm1 + gm2);
  }
  model.iterations = iter;
  model.kkt_violation = violation;

  // rho from free variables, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < m; ++t) {
    const double yg = sign_of(t) * grad[t];
    if (beta[t] >= C) {
      if (t >= n) {
        ub = std::min(ub, yg);
      } else {
        lb = std::max(lb, yg);
      }
    } else if (beta[t] <= 0.0) {
      if (t < n) {
        ub = std::min(ub, yg);
      } else {
        lb = std::max(lb, yg);
      }
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  model.rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);

  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < n; ++i) {
    if (beta[i] - beta[i + n] != 0.0) support.push_back(i);
  }
  model.support_vectors = Matrix(support.size(), x.cols());
  model.coefficients.reserve(support.size());
  for (std::size_t s = 0; s < support.size(); ++s) {
    std::copy_n(x.row(support[s]).begin(), x.cols(), model.support_vectors.row(s).begin());
    model.coefficients.push_back(beta[support[s]] - beta[support[s] + n]);
  }
  return model;
}

/// Decision value in standardized units.
inline double svr_decision(const SvrModel& model, std::span<const double> x) {
  if (x.size() != model.dim() && model.support_vectors.rows() > 0) {
    throw ValidationError("input dimension " + std::to_string(x.size()) + " does not match model dimension " +
                          std::to_string(model.dim()));
  }
  double f = -model.rho;
  for (std::size_t s = 0; s < model.coefficients.size(); ++s) {
    f += model.coefficients[s] * rbf_kernel(model.support_vectors.row(s), x, model.params.gamma);
  }
  return f;
}

inline double svr_predict(const SvrModel& model, std::span<const double> x) {
  return svr_decision(model, x) * model.y_scale + model.y_mean;
}

/// C in {1, 10, 100}, epsilon in {0.01, 0.1}, gamma in {0.01, 0.1, 1} / dim.
inline std::vector<SvrParams> default_svr_grid(std::size_t dim) {
  std::vector<SvrParams> grid;
  const double d = static_cast<double>(std::max<std::size_t>(dim, 1));
  for (const double c : {1.0, 10.0, 100.0}) {
    for (const double e : {0.01, 0.1}) {
      for (const double g : {0.01, 0.1, 1.0}) grid.push_back({c, e, g / d});
    }
  }
  return grid;
}

struct TuningResult {
  SvrParams best;
  /// Mean median-APE across folds, aligned with the grid.
  std::vector<double> scores;
};

inline Matrix select_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) std::copy_n(x.row(rows[r]).begin(), x.cols(), out.row(r).begin());
  return out;
}

/// k-fold cross-validation over `grid`, scored by mean median-APE. Ties go
/// to smaller C, then smaller gamma, then smaller epsilon.
inline TuningResult tune_hyperparams(const Matrix& x, std::span<const double> y, const std::vector<SvrParams>& grid,
                                     std::size_t folds, std::uint64_t seed) {
  if (grid.empty()) throw ValidationError("hyperparameter grid is empty");
  if (folds < 2) throw ValidationError("need at least 2 folds");
  if (x.rows() < folds) {
    throw ValidationError("fewer samples (" + std::to_string(x.rows()) + ") than folds (" + std::to_string(folds) + ")");
  }
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "cv-folds"));
  rng.shuffle(order);
  std::vector<std::size_t> fold_of(x.rows());
  for (std::size_t p = 0; p < order.size(); ++p) fold_of[order[p]] = p % folds;

  TuningResult result;
  result.scores.reserve(grid.size());
  for (const auto& params : grid) {
    double total = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<std::size_t> train;
      std::vector<std::size_t> held;
      for (std::size_t r = 0; r < x.rows(); ++r) (fold_of[r] == f ? held : train).push_back(r);
      std::vector<double> y_train;
      for (const auto r : train) y_train.push_back(y[r]);
      const auto model = svr_fit(select_rows(x, train), y_train, params);
      std::vector<double> preds;
      std::vector<double> actual;
      for (const auto r : held) {
        preds.push_back(svr_predict(model, x.row(r)));
        actual.push_back(y[r]);
      }
      total += median_error_rate(preds, actual);
    }
    result.scores.push_back(total / static_cast<double>(folds));
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const auto& a = grid[g];
    const auto& b = grid[best];
    if (result.scores[g] < result.scores[best] ||
        (result.scores[g] == result.scores[best] &&
         std::tie(a.C, a.gamma, a.epsilon) < std::tie(b.C, b.gamma, b.epsilon))) {
      best = g;
    }
  }
  result.best = grid[best];
  return result;
}

// ---------------------------------------------------------------------------
// A trained valuation model: normalizer plus SVR for one representation mode.

struct ValuationModel {
  RepresentationMode mode = RepresentationMode::kFull;
  std::size_t feature_dim = 0;
  Normalizer normalizer;
  SvrModel svr;

  bool operator==(const ValuationModel&) const = default;
};

/// Header line {kind:"valuation", mode, feature_dim, C, epsilon, gamma, rho,
/// y_mean, y_scale, converged, kkt_violation, iterations, normalizer{means,
/// stds}} then one {sv, coef} line per support vector.
inline void save_valuation_model(const std::filesystem::path& path, const ValuationModel& model) {
  std::vector<Json> lines;
  Json h;
  h["kind"] = "valuation";
  h["mode"] = std::string(to_string(model.mode));
  h["feature_dim"] = model.feature_dim;
  h["dim"] = model.svr.dim();
  h["C"] = model.svr.params.C;
  h["epsilon"] = model.svr.params.epsilon;
  h["gamma"] = model.svr.params.gamma;
  h["rho"] = model.svr.rho;
  h["y_mean"] = model.svr.y_mean;
  h["y_scale"] = model.svr.y_scale;
  h["converged"] = model.svr.converged;
  h["kkt_violation"] = model.svr.kkt_violation;
  h["iterations"] = model.svr.iterations;
  h["normalizer"] = {{"means", model.normalizer.means}, {"stds", model.normalizer.stds}};
  lines.push_back(std::move(h));
  for (std::size_t s = 0; s < model.svr.coefficients.size(); ++s) {
    Json j;
    const auto row = model.svr.support_vectors.row(s);
    j["sv"] = std::vector<double>(row.begin(), row.end());
    j["coef"] = model.svr.coefficients[s];
    lines.push_back(std::move(j));
  }
  write_jsonl(path, lines);
}

inline ValuationModel load_valuation_model(const std::filesystem::path& path) {
  const auto lines = read_jsonl(path);
  if (lines.empty() || lines.front().value("kind", "") != "valuation") {
    throw ParseError(path.string() + ":1: expected a valuation model header");
  }
  const auto& h = lines.front();
  ValuationModel model;
  model.mode = parse_mode(h.at("mode").get<std::string>());
  model.feature_dim = h.at("feature_dim").get<std::size_t>();
  const auto dim = h.at("dim").get<std::size_t>();
  model.svr.params = {h.at("C").get<double>(), h.at("epsilon").get<double>(), h.at("gamma").get<double>()};
  model.svr.rho = h.at("rho").get<double>();
  model.svr.y_mean = h.at("y_mean").get<double>();
  model.svr.y_scale = h.at("y_scale").get<double>();
  model.svr.converged = h.at("converged").get<bool>();
  model.svr.kkt_violation = h.at("kkt_violation").get<double>();
  model.svr.iterations = h.at("iterations").get<std::size_t>();
  model.normalizer.means = h.at("normalizer").at("means").get<std::array<double, kMetadataFields>>();
  model.normalizer.stds = h.at("normalizer").at("stds").get<std::array<double, kMetadataFields>>();
  for (std::size_t f = 0; f < kMetadataFields; ++f) model.normalizer.degenerate[f] = model.normalizer.stds[f] == 0.0;
  model.svr.support_vectors = Matrix(lines.size() - 1, dim);
  for (std::size_t s = 1; s < lines.size(); ++s) {
    const auto sv = lines[s].at("sv").get<std::vector<double>>();
    if (sv.size() != dim) throw ParseError(path.string() + ":" + std::to_string(s + 1) + ": support vector length");
    std::copy(sv.begin(), sv.end(), model.svr.support_vectors.row(s - 1).begin());
    model.svr.coefficients.push_back(lines[s].at("coef").get<double>());
  }
  return model;
}

}  // namespace luxappraise
