#pragma once

// Seeded generator of desk-scale worlds with known ground truth, plus
// simulated crowd workers answering grid and anchor tasks.
//
// Photo features are E(room, luxury) + N(0, feature_noise_sigma^2) per entry:
//   [0, 7)   room one-hot
//   [7, 15)  luxury thermometer, entry j = clamp(latent - j - offset(room), 0, 1)
//   15       latent / 8
//   [16, D)  pure noise
// offset(room) = 0.1 * (room_index - 3) gives each room its own thresholds.
//
// Purchase price (log scale):
//   log P = log(reference_price)
//         + w_size * log(size / 2000) + w_age * log((1 + age) / 21)
//         + w_bed  * log((1 + bedrooms) / 4) + w_bath * log((1 + bathrooms) / 3)
//         + (luxury_price_weight / reference_price) * (mean_latent_luxury - 4)
//         + N(0, noise_sigma^2)
// Offered price and Zestimate are P * exp(N(0, sigma^2)) with their own sigmas.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "luxappraise/crowd_tasks.hpp"
#include "luxappraise/jsonl.hpp"
#include "luxappraise/records.hpp"
#include "luxappraise/rng.hpp"

namespace luxappraise {

inline constexpr std::size_t kEncodingDim = 16;
inline constexpr std::size_t kThermometerOffset = kRoomCount;
inline constexpr std::size_t kThermometerSize = 8;

struct MetadataWeights {
  double size = 0.9;
  double age = -0.08;
  double bedrooms = 0.15;
  double bathrooms = 0.2;

  bool operator==(const MetadataWeights&) const = default;
};

struct WorldConfig {
  std::size_t n_houses = 5000;
  std::size_t photos_per_house_min = 3;
  std::size_t photos_per_house_max = 8;
  std::size_t feature_dim = kEncodingDim;
  /// USD added per unit of mean luxury for a house at the reference price.
  double luxury_price_weight = 30000.0;
  double reference_price = 300000.0;
  MetadataWeights metadata_weights;
  /// Log-scale noise on the purchase price.
  double noise_sigma = 0.03;
  double offered_noise_sigma = 0.10;
  double zestimate_noise_sigma = 0.10;
  double feature_noise_sigma = 0.2;
  /// Photos per room for the non-listing sources.
  std::size_t houzz_per_room = 80;
  std::size_t places_per_room = 40;
  std::size_t google_per_room = 40;
  double test_fraction = 0.2;
  std::uint64_t seed = 1;

  bool operator==(const WorldConfig&) const = default;
};

inline void validate(const WorldConfig& c) {
  if (c.n_houses < 1) throw ValidationError("n_houses must be >= 1");
  if (c.photos_per_house_min > c.photos_per_house_max) throw ValidationError("photos_per_house range is inverted");
  if (c.feature_dim < kEncodingDim) {
    throw ValidationError("feature_dim must be >= " + std::to_string(kEncodingDim));
  }
  if (!(c.luxury_price_weight >= 0.0)) throw ValidationError("luxury_price_weight must be >= 0");
  if (!(c.reference_price > 0.0)) throw ValidationError("reference_price must be > 0");
  for (const double s : {c.noise_sigma, c.offered_noise_sigma, c.zestimate_noise_sigma, c.feature_noise_sigma}) {
    if (!(s >= 0.0)) throw ValidationError("noise parameters must be >= 0");
  }
  if (!(c.test_fraction >= 0.0 && c.test_fraction < 1.0)) throw ValidationError("test_fraction must be in [0,1)");
}

inline Json to_json(const WorldConfig& c) {
  Json j;
  j["n_houses"] = c.n_houses;
  j["photos_per_house"] = {c.photos_per_house_min, c.photos_per_house_max};
  j["feature_dim"] = c.feature_dim;
  j["luxury_price_weight"] = c.luxury_price_weight;
  j["reference_price"] = c.reference_price;
  j["metadata_weights"] = {{"size", c.metadata_weights.size},
                           {"age", c.metadata_weights.age},
                           {"bedrooms", c.metadata_weights.bedrooms},
                           {"bathrooms", c.metadata_weights.bathrooms}};
  j["noise_sigma"] = c.noise_sigma;
  j["offered_noise_sigma"] = c.offered_noise_sigma;
  j["zestimate_noise_sigma"] = c.zestimate_noise_sigma;
  j["feature_noise_sigma"] = c.feature_noise_sigma;
  j["houzz_per_room"] = c.houzz_per_room;
  j["places_per_room"] = c.places_per_room;
  j["google_per_room"] = c.google_per_room;
  j["test_fraction"] = c.test_fraction;
  j["seed"] = c.seed;
  return j;
}

/// Missing keys keep their defaults.
inline WorldConfig world_config_from_json(const Json& j) {
  WorldConfig c;
  c.n_houses = j.value("n_houses", c.n_houses);
  if (j.contains("photos_per_house")) {
    const auto range = j.at("photos_per_house").get<std::vector<std::size_t>>();
    if (range.size() != 2) throw ValidationError("photos_per_house must be [min, max]");
    c.photos_per_house_min = range[0];
    c.photos_per_house_max = range[1];
  }
  c.feature_dim = j.value("feature_dim", c.feature_dim);
  c.luxury_price_weight = j.value("luxury_price_weight", c.luxury_price_weight);
  c.reference_price = j.value("reference_price", c.reference_price);
  if (j.contains("metadata_weights")) {
    const auto& w = j.at("metadata_weights");
    c.metadata_weights.size = w.value("size", c.metadata_weights.size);
    c.metadata_weights.age = w.value("age", c.metadata_weights.age);
    c.metadata_weights.bedrooms = w.value("bedrooms", c.metadata_weights.bedrooms);
    c.metadata_weights.bathrooms = w.value("bathrooms", c.metadata_weights.bathrooms);
  }
  c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
  c.offered_noise_sigma = j.value("offered_noise_sigma", c.offered_noise_sigma);
  c.zestimate_noise_sigma = j.value("zestimate_noise_sigma", c.zestimate_noise_sigma);
  c.feature_noise_sigma = j.value("feature_noise_sigma", c.feature_noise_sigma);
  c.houzz_per_room = j.value("houzz_per_room", c.houzz_per_room);
  c.places_per_room = j.value("places_per_room", c.places_per_room);
  c.google_per_room = j.value("google_per_room", c.google_per_room);
  c.test_fraction = j.value("test_fraction", c.test_fraction);
  c.seed = j.value("seed", c.seed);
  validate(c);
  return c;
}

/// Noise-free encoding E(room, latent), length kEncodingDim.
inline std::vector<double> encode_photo(RoomCategory room, double latent) {
  std::vector<double> f(kEncodingDim, 0.0);
  f[room_index(room)] = 1.0;
  const double offset = 0.1 * (static_cast<double>(room_index(room)) - 3.0);
  for (std::size_t j = 0; j < kThermometerSize; ++j) {
    f[kThermometerOffset + j] = std::clamp(latent - static_cast<double>(j) - offset, 0.0, 1.0);
  }
  f[kEncodingDim - 1] = latent / 8.0;
  return f;
}

/// Noise-free log purchase price from stored fields.
inline double structural_log_price(const WorldConfig& c, const MetadataVector& m, double mean_luxury) {
  const auto& w = c.metadata_weights;
  return std::log(c.reference_price) + w.size * std::log(m.size / 2000.0) + w.age * std::log((1.0 + m.age) / 21.0) +
         w.bedrooms * std::log((1.0 + m.bedrooms) / 4.0) + w.bathrooms * std::log((1.0 + m.bathrooms) / 3.0) +
         (c.luxury_price_weight / c.reference_price) * (mean_luxury - 4.0);
}

/// Mean latent luxury over a house's photos; 4 (midpoint) for a house with none.
inline double mean_latent_luxury(const Dataset& dataset, const HouseRecord& house) {
  if (house.photo_ids.empty()) return 4.0;
  double sum = 0.0;
  for (const auto& pid : house.photo_ids) sum += dataset.photo(pid).latent_luxury.value_or(4.0);
  return sum / static_cast<double>(house.photo_ids.size());
}

inline int budget_from_latent(double latent) { return 1 + std::min(3, static_cast<int>(std::floor(latent / 2.0))); }

inline std::string numbered_id(char prefix, std::size_t n, int width) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%c%0*zu", prefix, width, n);
  return buffer;
}

inline Dataset generate_world(const WorldConfig& config) {
  validate(config);
  Dataset dataset;
  dataset.feature_dim = config.feature_dim;

  Rng photo_rng(derive_seed(config.seed, "photos"));
  std::size_t next_photo = 1;
  const auto make_photo = [&](PhotoSource source, RoomCategory room) {
    PhotoRecord p;
    p.id = numbered_id('p', next_photo++, 7);
    p.source = source;
    p.room_true = room;
    const double latent = photo_rng.uniform(0.0, 8.0);
    p.latent_luxury = latent;
    p.features = encode_photo(room, latent);
    p.features.resize(config.feature_dim, 0.0);
    for (auto& f : p.features) f += config.feature_noise_sigma * photo_rng.normal();
    if (source == PhotoSource::kHouzz) p.budget_level = budget_from_latent(latent);
    return p;
  };

  Rng house_rng(derive_seed(config.seed, "houses"));
  std::vector<std::string> house_ids;
  for (std::size_t h = 0; h < config.n_houses; ++h) {
    HouseRecord house;
    house.id = numbered_id('h', h + 1, 6);
    auto& m = house.metadata;
    m.size = std::round(std::exp(house_rng.uniform(std::log(700.0), std::log(5000.0))));
    m.age = static_cast<double>(house_rng.integer(0, 100));
    m.bedrooms = std::clamp(std::round(m.size / 650.0 + 0.7 * house_rng.normal()), 1.0, 7.0);
    m.bathrooms = std::clamp(std::round(0.6 * m.bedrooms + 0.5 * house_rng.normal()), 1.0, 5.0);

    const auto n_photos = static_cast<std::size_t>(house_rng.integer(
        static_cast<std::int64_t>(config.photos_per_house_min), static_cast<std::int64_t>(config.photos_per_house_max)));
    double luxury_sum = 0.0;
    for (std::size_t k = 0; k < n_photos; ++k) {
      const RoomCategory room = room_from_index(static_cast<std::size_t>(house_rng.below(kRoomCount)));
      PhotoRecord p = make_photo(PhotoSource::kZillow, room);
      p.house_id = house.id;
      luxury_sum += *p.latent_luxury;
      house.photo_ids.push_back(p.id);
      dataset.photos.emplace(p.id, std::move(p));
    }
    const double mean_luxury = n_photos > 0 ? luxury_sum / static_cast<double>(n_photos) : 4.0;
    const double log_price = structural_log_price(config, m, mean_luxury) + config.noise_sigma * house_rng.normal();
    const double price = std::exp(log_price);
    house.purchase_price = price;
    m.offered_price = price * std::exp(config.offered_noise_sigma * house_rng.normal());
    m.zestimate = price * std::exp(config.zestimate_noise_sigma * house_rng.normal());
    house_ids.push_back(house.id);
    dataset.houses.emplace(house.id, std::move(house));
  }

  for (const RoomCategory room : kAllRooms) {
    for (std::size_t i = 0; i < config.houzz_per_room; ++i) {
      auto p = make_photo(PhotoSource::kHouzz, room);
      dataset.photos.emplace(p.id, std::move(p));
    }
    for (std::size_t i = 0; i < config.places_per_room; ++i) {
      auto p = make_photo(PhotoSource::kPlaces, room);
      dataset.photos.emplace(p.id, std::move(p));
    }
    for (std::size_t i = 0; i < config.google_per_room; ++i) {
      auto p = make_photo(PhotoSource::kGoogle, room);
      dataset.photos.emplace(p.id, std::move(p));
    }
  }

  Rng split_rng(derive_seed(config.seed, "split"));
  split_rng.shuffle(house_ids);
  const auto n_test = static_cast<std::size_t>(std::floor(config.test_fraction * static_cast<double>(config.n_houses)));
  for (std::size_t i = 0; i < n_test; ++i) dataset.houses.at(house_ids[i]).split = Split::kTest;

  validate(dataset);
  return dataset;
}

// ---------------------------------------------------------------------------
// Simulated annotators

struct AnnotatorModel {
  /// Latent-luxury distance within which two photos read as similar.
  double similarity_threshold = 1.0;
  /// Logistic noise scale on grid judgments.
  double grid_noise = 0.25;
  /// Gaussian noise on anchor-level judgments.
  double level_noise_sigma = 0.75;
  /// Probability of attending; otherwise the worker answers uniformly at random.
  double reliability = 0.95;

  bool operator==(const AnnotatorModel&) const = default;
};

inline void validate(const AnnotatorModel& m) {
  if (!(m.similarity_threshold > 0.0)) throw ValidationError("similarity_threshold must be > 0");
  if (!(m.grid_noise >= 0.0)) throw ValidationError("grid_noise must be >= 0");
  if (!(m.level_noise_sigma >= 0.0)) throw ValidationError("level_noise_sigma must be >= 0");
  if (!(m.reliability >= 0.0 && m.reliability <= 1.0)) throw ValidationError("reliability must be in [0,1]");
}

inline Json to_json(const AnnotatorModel& m) {
  Json j;
  j["similarity_threshold"] = m.similarity_threshold;
  j["grid_noise"] = m.grid_noise;
  j["level_noise_sigma"] = m.level_noise_sigma;
  j["reliability"] = m.reliability;
  return j;
}

inline AnnotatorModel annotator_model_from_json(const Json& j) {
  AnnotatorModel m;
  m.similarity_threshold = j.value("similarity_threshold", m.similarity_threshold);
  m.grid_noise = j.value("grid_noise", m.grid_noise);
  m.level_noise_sigma = j.value("level_noise_sigma", m.level_noise_sigma);
  m.reliability = j.value("reliability", m.reliability);
  validate(m);
  return m;
}

inline double require_latent(const Dataset& dataset, const std::string& photo_id) {
  const auto& photo = dataset.photo(photo_id);
  if (!photo.latent_luxury) throw ValidationError("photo " + photo_id + " has no latent_luxury");
  return *photo.latent_luxury;
}

inline double round_half_even(double x) {
  const double floor = std::floor(x);
  const double diff = x - floor;
  if (diff < 0.5) return floor;
  if (diff > 0.5) return floor + 1.0;
  return std::fmod(floor, 2.0) == 0.0 ? floor : floor + 1.0;
}

/// clamp(round_half_even(x), 1, 8)
inline LuxuryLevel level_from_latent(double x) {
  return LuxuryLevel(static_cast<int>(std::clamp(round_half_even(x), 1.0, 8.0)));
}

/// Probability an attending worker marks a gallery photo as similar.
inline double selection_probability(const AnnotatorModel& model, double distance) {
  if (model.grid_noise == 0.0) return distance <= model.similarity_threshold ? 1.0 : 0.0;
  return 1.0 / (1.0 + std::exp(-(model.similarity_threshold - distance) / model.grid_noise));
}

inline GridResponse simulate_grid_response(const GridTask& task, const Dataset& dataset, const AnnotatorModel& model,
                                           std::uint64_t seed) {
  validate(model);
  const double probe = require_latent(dataset, task.probe);
  std::vector<double> latents;
  latents.reserve(task.gallery.size());
  for (const auto& g : task.gallery) latents.push_back(require_latent(dataset, g));

  Rng rng(derive_seed(seed, "grid-response"));
  const bool attending = rng.uniform() < model.reliability;
  GridResponse response;
  response.task_id = task.id;
  for (std::size_t i = 0; i < task.gallery.size(); ++i) {
    const double p = attending ? selection_probability(model, std::abs(latents[i] - probe)) : 0.5;
    // Always draw so the stream position does not depend on p.
    if (rng.uniform() < p) response.selected.push_back(task.gallery[i]);
  }
  return response;
}

inline LuxuryLevel simulate_anchor_response(const PhotoRecord& photo, const AnnotatorModel& model, std::uint64_t seed) {
  validate(model);
  if (!photo.latent_luxury) throw ValidationError("photo " + photo.id + " has no latent_luxury");
  Rng rng(derive_seed(seed, "anchor-response"));
  const bool attending = rng.uniform() < model.reliability;
  const double noise = rng.normal();
  const auto random_level = static_cast<int>(rng.below(LuxuryLevel::kCount)) + LuxuryLevel::kMin;
  if (!attending) return LuxuryLevel(random_level);
  return level_from_latent(*photo.latent_luxury + model.level_noise_sigma * noise);
}

}  // namespace luxappraise
