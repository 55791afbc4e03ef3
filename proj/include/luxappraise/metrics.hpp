#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "luxappraise/error.hpp"

namespace luxappraise {

/// Median of a nonempty list; mean of the two middle values for even counts.
inline double median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median of an empty list");
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

/// Median over houses of |prediction - actual| / actual.
inline double median_error_rate(std::span<const double> predictions, std::span<const double> actuals) {
  if (predictions.size() != actuals.size()) {
    throw ValidationError("prediction and price lists differ in length (" + std::to_string(predictions.size()) +
                          " vs " + std::to_string(actuals.size()) + ")");
  }
  if (predictions.empty()) throw ValidationError("median error rate of an empty list");
  std::vector<double> errors;
  errors.reserve(actuals.size());
  for (std::size_t i = 0; i < actuals.size(); ++i) {
    if (!(actuals[i] > 0.0)) throw ValidationError("purchase prices must be > 0");
    errors.push_back(std::abs(predictions[i] - actuals[i]) / actuals[i]);
  }
  return median(std::move(errors));
}

}  // namespace luxappraise
