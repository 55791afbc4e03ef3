#pragma once

// Line-delimited record format for photos and houses.
//
// photos file, keys in this order (optional keys omitted when absent):
//   id, source, features, room_true?, budget_level?, latent_luxury?, house_id?
// houses file:
//   id, metadata{offered_price, zestimate, size, age, bedrooms, bathrooms},
//   photo_ids, purchase_price?, split

#include <filesystem>
#include <set>
#include <string>

#include "luxappraise/jsonl.hpp"
#include "luxappraise/records.hpp"

namespace luxappraise {

inline Json to_json(const PhotoRecord& photo) {
  Json j;
  j["id"] = photo.id;
  j["source"] = std::string(to_string(photo.source));
  j["features"] = photo.features;
  if (photo.room_true) j["room_true"] = std::string(to_string(*photo.room_true));
  if (photo.budget_level) j["budget_level"] = *photo.budget_level;
  if (photo.latent_luxury) j["latent_luxury"] = *photo.latent_luxury;
  if (photo.house_id) j["house_id"] = *photo.house_id;
  return j;
}

inline PhotoRecord photo_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("photo record must be an object");
  PhotoRecord p;
  p.id = j.at("id").get<std::string>();
  p.source = parse_source(j.at("source").get<std::string>());
  const auto& features = j.at("features");
  if (!features.is_array()) throw ValidationError("photo " + p.id + ": features must be an array");
  p.features.reserve(features.size());
  for (const auto& f : features) {
    if (!f.is_number()) throw ValidationError("photo " + p.id + ": features must be numbers");
    p.features.push_back(f.get<double>());
  }
  if (j.contains("room_true")) p.room_true = parse_room(j.at("room_true").get<std::string>());
  if (j.contains("budget_level")) p.budget_level = j.at("budget_level").get<int>();
  if (j.contains("latent_luxury")) p.latent_luxury = j.at("latent_luxury").get<double>();
  if (j.contains("house_id")) p.house_id = j.at("house_id").get<std::string>();
  validate(p);
  return p;
}

inline Json to_json(const MetadataVector& m) {
  Json j;
  j["offered_price"] = m.offered_price;
  j["zestimate"] = m.zestimate;
  j["size"] = m.size;
  j["age"] = m.age;
  j["bedrooms"] = m.bedrooms;
  j["bathrooms"] = m.bathrooms;
  return j;
}

inline MetadataVector metadata_from_json(const Json& j) {
  MetadataVector m;
  m.offered_price = j.at("offered_price").get<double>();
  m.zestimate = j.at("zestimate").get<double>();
  m.size = j.at("size").get<double>();
  m.age = j.at("age").get<double>();
  m.bedrooms = j.at("bedrooms").get<double>();
  m.bathrooms = j.at("bathrooms").get<double>();
  return m;
}

inline Json to_json(const HouseRecord& house) {
  Json j;
  j["id"] = house.id;
  j["metadata"] = to_json(house.metadata);
  j["photo_ids"] = house.photo_ids;
  if (house.purchase_price) j["purchase_price"] = *house.purchase_price;
  j["split"] = std::string(to_string(house.split));
  return j;
}

inline HouseRecord house_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("house record must be an object");
  HouseRecord h;
  h.id = j.at("id").get<std::string>();
  h.metadata = metadata_from_json(j.at("metadata"));
  h.photo_ids = j.at("photo_ids").get<std::vector<std::string>>();
  if (j.contains("purchase_price")) h.purchase_price = j.at("purchase_price").get<double>();
  h.split = parse_split(j.at("split").get<std::string>());
  validate(h);
  return h;
}

/// Loads and validates a dataset. Never returns a partially valid dataset.
inline Dataset load_dataset(const std::filesystem::path& photos_path, const std::filesystem::path& houses_path) {
  Dataset dataset;
  const PhotoRecord* first = nullptr;
  read_jsonl(photos_path, [&](const Json& j, std::size_t) {
    PhotoRecord photo = photo_from_json(j);
    if (first != nullptr && photo.features.size() != first->features.size()) {
      throw ValidationError("feature dimension mismatch between photos " + first->id + " (" +
                            std::to_string(first->features.size()) + ") and " + photo.id + " (" +
                            std::to_string(photo.features.size()) + ")");
    }
    const std::string id = photo.id;
    auto [it, inserted] = dataset.photos.emplace(id, std::move(photo));
    if (!inserted) throw ValidationError("duplicate photo id '" + id + "'");
    if (first == nullptr) first = &it->second;
  });
  read_jsonl(houses_path, [&](const Json& j, std::size_t) {
    HouseRecord house = house_from_json(j);
    const std::string id = house.id;
    if (!dataset.houses.emplace(id, std::move(house)).second) {
      throw ValidationError("duplicate house id '" + id + "'");
    }
  });
  dataset.feature_dim = first != nullptr ? first->features.size() : 0;
  validate(dataset);
  return dataset;
}

/// Writes both files in ascending id order, so equal datasets give equal bytes.
inline void save_dataset(const Dataset& dataset, const std::filesystem::path& photos_path,
                         const std::filesystem::path& houses_path) {
  validate(dataset);
  std::vector<Json> photos;
  photos.reserve(dataset.photos.size());
  for (const auto& [id, photo] : dataset.photos) photos.push_back(to_json(photo));
  std::vector<Json> houses;
  houses.reserve(dataset.houses.size());
  for (const auto& [id, house] : dataset.houses) houses.push_back(to_json(house));
  write_jsonl(photos_path, photos);
  write_jsonl(houses_path, houses);
}

/// Conventional file names inside a dataset directory.
inline std::filesystem::path photos_file(const std::filesystem::path& dir) { return dir / "photos.jsonl"; }
inline std::filesystem::path houses_file(const std::filesystem::path& dir) { return dir / "houses.jsonl"; }

inline Dataset load_dataset_dir(const std::filesystem::path& dir) {
  return load_dataset(photos_file(dir), houses_file(dir));
}

inline void save_dataset_dir(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_dataset(dataset, photos_file(dir), houses_file(dir));
}

}  // namespace luxappraise
