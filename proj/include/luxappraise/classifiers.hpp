#pragma once

// Multinomial logistic regression over photo feature vectors. Used for room
// categories (7 classes) and luxury levels (8 classes).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "luxappraise/error.hpp"
#include "luxappraise/jsonl.hpp"
#include "luxappraise/matrix.hpp"
#include "luxappraise/rng.hpp"

namespace luxappraise {

struct SoftmaxConfig {
  double l2_lambda = 1e-3;
  std::size_t max_iters = 500;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;

  bool operator==(const SoftmaxConfig&) const = default;
};

struct SoftmaxModel {
  /// C x (D + 1); the last column is the bias.
  Matrix weights;
  std::vector<std::string> classes;
  SoftmaxConfig config;
  double initial_loss = 0.0;
  double final_loss = 0.0;

  std::size_t feature_dim() const { return weights.cols() - 1; }
  std::size_t class_count() const { return weights.rows(); }

  bool operator==(const SoftmaxModel&) const = default;
};

struct Prediction {
  std::size_t label = 0;
  std::vector<double> probabilities;
};

namespace detail {

/// Writes W [x; 1] into `logits` and its softmax into `probs`.
inline void softmax_probs(const Matrix& weights, std::span<const double> x, std::vector<double>& logits,
                          std::vector<double>& probs) {
  const std::size_t c_count = weights.rows();
  const std::size_t d = weights.cols() - 1;
  logits.assign(c_count, 0.0);
  for (std::size_t c = 0; c < c_count; ++c) {
    const auto w = weights.row(c);
    double z = w[d];
    for (std::size_t e = 0; e < d; ++e) z += w[e] * x[e];
    logits[c] = z;
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  probs.assign(c_count, 0.0);
  for (std::size_t c = 0; c < c_count; ++c) {
    probs[c] = std::exp(logits[c] - m);
    total += probs[c];
  }
  for (auto& p : probs) p /= total;
}

inline double penalty(const Matrix& weights, double l2_lambda) {
  const std::size_t d = weights.cols() - 1;
  double sum = 0.0;
  for (std::size_t c = 0; c < weights.rows(); ++c) {
    for (std::size_t e = 0; e < d; ++e) sum += weights(c, e) * weights(c, e);
  }
  return l2_lambda * sum;
}

}  // namespace detail

/// Mean cross-entropy plus l2_lambda * |W|^2 (bias column excluded).
inline double softmax_loss(const Matrix& weights, const Matrix& features, std::span<const std::size_t> labels,
                           double l2_lambda) {
  std::vector<double> logits;
  std::vector<double> probs;
  double loss = 0.0;
  for (std::size_t r = 0; r < features.rows(); ++r) {
    detail::softmax_probs(weights, features.row(r), logits, probs);
    const double m = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (const double z : logits) total += std::exp(z - m);
    loss -= logits[labels[r]] - m - std::log(total);
  }
  return loss / static_cast<double>(features.rows()) + detail::penalty(weights, l2_lambda);
}

struct SoftmaxLossGrad {
  double loss = 0.0;
  Matrix gradient;
};

inline SoftmaxLossGrad softmax_loss_grad(const Matrix& weights, const Matrix& features,
                                         std::span<const std::size_t> labels, double l2_lambda) {
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  if (weights.cols() != d + 1) throw ValidationError("weights do not match feature dimension");
  SoftmaxLossGrad out{0.0, Matrix(weights.rows(), d + 1)};
  std::vector<double> logits;
  std::vector<double> probs;
  for (std::size_t r = 0; r < n; ++r) {
    const auto x = features.row(r);
    detail::softmax_probs(weights, x, logits, probs);
    out.loss -= std::log(std::max(probs[labels[r]], std::numeric_limits<double>::min()));
    for (std::size_t c = 0; c < weights.rows(); ++c) {
      const double delta = probs[c] - (c == labels[r] ? 1.0 : 0.0);
      auto g = out.gradient.row(c);
      for (std::size_t e = 0; e < d; ++e) g[e] += delta * x[e];
      g[d] += delta;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.loss = out.loss * inv_n + detail::penalty(weights, l2_lambda);
  for (std::size_t c = 0; c < weights.rows(); ++c) {
    auto g = out.gradient.row(c);
    for (std::size_t e = 0; e <= d; ++e) g[e] *= inv_n;
    for (std::size_t e = 0; e < d; ++e) g[e] += 2.0 * l2_lambda * weights(c, e);
  }
  return out;
}

/// Full-batch gradient descent with step halving on loss increase. Samples
/// are processed in a canonical order, so permuting the input leaves the
/// result bit-identical.
inline SoftmaxModel softmax_train(const Matrix& features, std::span<const std::size_t> labels,
                                  const std::vector<std::string>& classes, const SoftmaxConfig& config) {
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  const std::size_t c_count = classes.size();
  if (c_count < 2) throw ValidationError("softmax needs at least 2 classes");
  if (labels.size() != n) throw ValidationError("feature and label counts differ");
  if (n < c_count) throw ValidationError("need at least as many samples as classes");
  if (!(config.l2_lambda >= 0.0)) throw ValidationError("l2_lambda must be >= 0");
  std::vector<std::size_t> per_class(c_count, 0);
  for (const auto l : labels) {
    if (l >= c_count) throw ValidationError("label index out of range: " + std::to_string(l));
    ++per_class[l];
  }
  for (std::size_t c = 0; c < c_count; ++c) {
    if (per_class[c] == 0) throw ValidationError("class '" + classes[c] + "' has no training samples");
  }
  for (const double v : features.data()) {
    if (!std::isfinite(v)) throw ValidationError("non-finite training feature");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = features.row(a);
    const auto rb = features.row(b);
    if (std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end())) return true;
    if (std::lexicographical_compare(rb.begin(), rb.end(), ra.begin(), ra.end())) return false;
    return labels[a] < labels[b];
  });
  Matrix x(n, d);
  std::vector<std::size_t> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(features.row(order[r]).begin(), d, x.row(r).begin());
    y[r] = labels[order[r]];
  }

  SoftmaxModel model;
  model.classes = classes;
  model.config = config;
  model.weights = Matrix(c_count, d + 1);
  Rng rng(derive_seed(config.seed, "softmax-init"));
  for (auto& w : model.weights.data()) w = rng.normal(0.0, 0.1);

  auto current = softmax_loss_grad(model.weights, x, y, config.l2_lambda);
  model.initial_loss = current.loss;
  Matrix candidate(c_count, d + 1);
  double step = config.learning_rate;
  for (std::size_t iter = 0; iter < config.max_iters && step > 1e-12; ++iter) {
    bool accepted = false;
    while (step > 1e-12) {
      for (std::size_t e = 0; e < candidate.data().size(); ++e) {
        candidate.data()[e] = model.weights.data()[e] - step * current.gradient.data()[e];
      }
      const double loss = softmax_loss(candidate, x, y, config.l2_lambda);
      if (std::isfinite(loss) && loss <= current.loss) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    model.weights = candidate;
    current = softmax_loss_grad(model.weights, x, y, config.l2_lambda);
    step *= 1.1;
  }
  model.final_loss = current.loss;
  return model;
}

/// Argmax label (ties to the smaller class index) and class probabilities.
inline Prediction softmax_predict(const SoftmaxModel& model, std::span<const double> x) {
  if (x.size() != model.feature_dim()) {
    throw ValidationError("feature dimension " + std::to_string(x.size()) + " does not match model dimension " +
                          std::to_string(model.feature_dim()));
  }
  for (const double v : x) {
    if (!std::isfinite(v)) throw ValidationError("non-finite feature");
  }
  Prediction p;
  std::vector<double> logits;
  detail::softmax_probs(model.weights, x, logits, p.probabilities);
  for (std::size_t c = 1; c < logits.size(); ++c) {
    if (logits[c] > logits[p.label]) p.label = c;
  }
  return p;
}

struct AccuracyReport {
  double accuracy = 0.0;
  /// confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
};

inline AccuracyReport evaluate_accuracy(const SoftmaxModel& model, const Matrix& features,
                                        std::span<const std::size_t> labels) {
  if (features.rows() == 0) throw ValidationError("empty evaluation set");
  if (labels.size() != features.rows()) throw ValidationError("feature and label counts differ");
  AccuracyReport report;
  report.confusion.assign(model.class_count(), std::vector<std::size_t>(model.class_count(), 0));
  std::size_t correct = 0;
  for (std::size_t r = 0; r < features.rows(); ++r) {
    if (labels[r] >= model.class_count()) throw ValidationError("label index out of range");
    const auto predicted = softmax_predict(model, features.row(r)).label;
    ++report.confusion[labels[r]][predicted];
    if (predicted == labels[r]) ++correct;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(features.rows());
  return report;
}

// ---------------------------------------------------------------------------
// Persistence. A model file holds named models; per model one header line
// {model, kind:"softmax", classes, feature_dim, l2_lambda, max_iters,
// learning_rate, seed} followed by one {model, class, weights} line per class.

inline void save_models(const std::filesystem::path& path, const std::map<std::string, SoftmaxModel>& models) {
  std::vector<Json> lines;
  for (const auto& [name, model] : models) {
    Json header;
    header["model"] = name;
    header["kind"] = "softmax";
    header["classes"] = model.classes;
    header["feature_dim"] = model.feature_dim();
    header["l2_lambda"] = model.config.l2_lambda;
    header["max_iters"] = model.config.max_iters;
    header["learning_rate"] = model.config.learning_rate;
    header["seed"] = model.config.seed;
    lines.push_back(std::move(header));
    for (std::size_t c = 0; c < model.class_count(); ++c) {
      Json row;
      row["model"] = name;
      row["class"] = model.classes[c];
      const auto w = model.weights.row(c);
      row["weights"] = std::vector<double>(w.begin(), w.end());
      lines.push_back(std::move(row));
    }
  }
  write_jsonl(path, lines);
}

inline std::map<std::string, SoftmaxModel> load_models(const std::filesystem::path& path) {
  std::map<std::string, SoftmaxModel> models;
  std::map<std::string, std::size_t> filled;
  read_jsonl(path, [&](const Json& j, std::size_t) {
    const auto name = j.at("model").get<std::string>();
    if (j.contains("kind")) {
      SoftmaxModel m;
      m.classes = j.at("classes").get<std::vector<std::string>>();
      const auto dim = j.at("feature_dim").get<std::size_t>();
      m.weights = Matrix(m.classes.size(), dim + 1);
      m.config.l2_lambda = j.at("l2_lambda").get<double>();
      m.config.max_iters = j.at("max_iters").get<std::size_t>();
      m.config.learning_rate = j.at("learning_rate").get<double>();
      m.config.seed = j.at("seed").get<std::uint64_t>();
      models[name] = std::move(m);
      filled[name] = 0;
      return;
    }
    auto it = models.find(name);
    if (it == models.end()) throw ValidationError("weights for undeclared model '" + name + "'");
    auto& m = it->second;
    const auto cls = j.at("class").get<std::string>();
    const auto pos = std::find(m.classes.begin(), m.classes.end(), cls);
    if (pos == m.classes.end()) throw ValidationError("unknown class '" + cls + "' in model '" + name + "'");
    const auto w = j.at("weights").get<std::vector<double>>();
    if (w.size() != m.weights.cols()) throw ValidationError("weight row length mismatch in model '" + name + "'");
    std::copy(w.begin(), w.end(), m.weights.row(static_cast<std::size_t>(pos - m.classes.begin())).begin());
    ++filled[name];
  });
  for (const auto& [name, model] : models) {
    if (filled[name] != model.class_count()) throw ValidationError("model '" + name + "' is missing weight rows");
  }
  return models;
}

}  // namespace luxappraise
