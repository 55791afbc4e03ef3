#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "luxappraise/error.hpp"

namespace luxappraise {

enum class RoomCategory {
  kBathroom,
  kBedroom,
  kKitchen,
  kLivingRoom,
  kDiningRoom,
  kInteriorMisc,
  kExterior,
};

inline constexpr std::size_t kRoomCount = 7;

inline constexpr std::array<RoomCategory, kRoomCount> kAllRooms = {
    RoomCategory::kBathroom,   RoomCategory::kBedroom,    RoomCategory::kKitchen,
    RoomCategory::kLivingRoom, RoomCategory::kDiningRoom, RoomCategory::kInteriorMisc,
    RoomCategory::kExterior,
};

inline constexpr std::array<std::string_view, kRoomCount> kRoomNames = {
    "bathroom", "bedroom", "kitchen", "living_room", "dining_room", "interior_misc", "exterior",
};

constexpr std::size_t room_index(RoomCategory room) { return static_cast<std::size_t>(room); }

constexpr std::string_view to_string(RoomCategory room) { return kRoomNames[room_index(room)]; }

inline RoomCategory room_from_index(std::size_t index) {
  if (index >= kRoomCount) throw ValidationError("room index out of range: " + std::to_string(index));
  return kAllRooms[index];
}

inline RoomCategory parse_room(std::string_view name) {
  for (std::size_t i = 0; i < kRoomCount; ++i) {
    if (kRoomNames[i] == name) return kAllRooms[i];
  }
  throw ValidationError("unknown room category '" + std::string(name) + "'");
}

/// Ordinal luxury rating, 1 (least luxurious) to 8 (most).
class LuxuryLevel {
 public:
  static constexpr int kMin = 1;
  static constexpr int kMax = 8;
  static constexpr int kCount = kMax - kMin + 1;

  explicit LuxuryLevel(int value) : value_(value) {
    if (value < kMin || value > kMax) {
      throw ValidationError("luxury level must be in [1,8], got " + std::to_string(value));
    }
  }

  int value() const { return value_; }
  /// Zero-based class index (level 1 -> 0).
  std::size_t index() const { return static_cast<std::size_t>(value_ - kMin); }

  static LuxuryLevel from_index(std::size_t index) { return LuxuryLevel(static_cast<int>(index) + kMin); }

  friend bool operator==(LuxuryLevel, LuxuryLevel) = default;
  friend auto operator<=>(LuxuryLevel, LuxuryLevel) = default;

 private:
  int value_;
};

enum class PhotoSource { kZillow, kHouzz, kPlaces, kGoogle, kSynthetic };

inline constexpr std::array<std::string_view, 5> kSourceNames = {"zillow", "houzz", "places", "google",
                                                                 "synthetic"};

constexpr std::string_view to_string(PhotoSource source) { return kSourceNames[static_cast<std::size_t>(source)]; }

inline PhotoSource parse_source(std::string_view name) {
  for (std::size_t i = 0; i < kSourceNames.size(); ++i) {
    if (kSourceNames[i] == name) return static_cast<PhotoSource>(i);
  }
  throw ValidationError("unknown photo source '" + std::string(name) + "'");
}

struct PhotoRecord {
  std::string id;
  PhotoSource source = PhotoSource::kSynthetic;
  std::vector<double> features;
  std::optional<RoomCategory> room_true;
  std::optional<int> budget_level;
  std::optional<double> latent_luxury;
  std::optional<std::string> house_id;

  bool operator==(const PhotoRecord&) const = default;
};

inline void validate(const PhotoRecord& photo) {
  if (photo.id.empty()) throw ValidationError("photo with empty id");
  for (const double f : photo.features) {
    if (!std::isfinite(f)) throw ValidationError("photo " + photo.id + " has a non-finite feature");
  }
  if (photo.budget_level) {
    if (photo.source != PhotoSource::kHouzz && photo.source != PhotoSource::kSynthetic) {
      throw ValidationError("photo " + photo.id + ": budget_level only allowed for houzz or synthetic photos");
    }
    if (*photo.budget_level < 1 || *photo.budget_level > 4) {
      throw ValidationError("photo " + photo.id + ": budget_level must be in [1,4]");
    }
  }
  if (photo.latent_luxury) {
    // Synthetic worlds label their stand-in sources too, so the latent is
    // allowed on any source a world generator emits.
    if (!std::isfinite(*photo.latent_luxury) || *photo.latent_luxury < 0.0 || *photo.latent_luxury > 8.0) {
      throw ValidationError("photo " + photo.id + ": latent_luxury must be in [0,8]");
    }
  }
}

inline constexpr std::size_t kMetadataFields = 6;

inline constexpr std::array<std::string_view, kMetadataFields> kMetadataNames = {
    "offered_price", "zestimate", "size", "age", "bedrooms", "bathrooms",
};

struct MetadataVector {
  double offered_price = 0.0;
  double zestimate = 0.0;
  double size = 0.0;
  double age = 0.0;
  double bedrooms = 0.0;
  double bathrooms = 0.0;

  std::array<double, kMetadataFields> values() const {
    return {offered_price, zestimate, size, age, bedrooms, bathrooms};
  }

  bool operator==(const MetadataVector&) const = default;
};

inline void validate(const MetadataVector& m, std::string_view owner) {
  for (const double v : m.values()) {
    if (!std::isfinite(v)) throw ValidationError("house " + std::string(owner) + ": non-finite metadata");
  }
  if (m.offered_price <= 0.0 || m.zestimate <= 0.0 || m.size <= 0.0) {
    throw ValidationError("house " + std::string(owner) + ": offered_price, zestimate and size must be > 0");
  }
  if (m.age < 0.0 || m.bedrooms < 0.0 || m.bathrooms < 0.0) {
    throw ValidationError("house " + std::string(owner) + ": age and counts must be >= 0");
  }
}

enum class Split { kTrain, kTest };

constexpr std::string_view to_string(Split split) { return split == Split::kTrain ? "train" : "test"; }

inline Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  throw ValidationError("unknown split '" + std::string(name) + "'");
}

struct HouseRecord {
  std::string id;
  MetadataVector metadata;
  std::vector<std::string> photo_ids;
  std::optional<double> purchase_price;
  Split split = Split::kTrain;

  bool operator==(const HouseRecord&) const = default;
};

inline void validate(const HouseRecord& house) {
  if (house.id.empty()) throw ValidationError("house with empty id");
  validate(house.metadata, house.id);
  if (house.purchase_price && !(*house.purchase_price > 0.0 && std::isfinite(*house.purchase_price))) {
    throw ValidationError("house " + house.id + ": purchase_price must be > 0");
  }
}

/// (probe, similar, dissimilar): the probe is closer in luxury to `similar`.
struct Triplet {
  std::string probe;
  std::string similar;
  std::string dissimilar;

  bool operator==(const Triplet&) const = default;
};

inline void validate(const Triplet& t) {
  if (t.probe == t.similar || t.probe == t.dissimilar || t.similar == t.dissimilar) {
    throw ValidationError("triplet ids must be distinct: (" + t.probe + ", " + t.similar + ", " + t.dissimilar + ")");
  }
}

/// Photos and houses keyed by id; maps keep iteration in ascending id order.
struct Dataset {
  std::map<std::string, PhotoRecord> photos;
  std::map<std::string, HouseRecord> houses;
  std::size_t feature_dim = 0;

  const PhotoRecord& photo(const std::string& id) const {
    const auto it = photos.find(id);
    if (it == photos.end()) throw NotFoundError("unknown photo id '" + id + "'");
    return it->second;
  }

  const HouseRecord& house(const std::string& id) const {
    const auto it = houses.find(id);
    if (it == houses.end()) throw NotFoundError("unknown house id '" + id + "'");
    return it->second;
  }

  bool operator==(const Dataset&) const = default;
};

/// Checks every record invariant and all cross-references.
inline void validate(const Dataset& dataset) {
  const PhotoRecord* first = nullptr;
  for (const auto& [id, photo] : dataset.photos) {
    if (id != photo.id) throw ValidationError("photo key '" + id + "' does not match record id '" + photo.id + "'");
    validate(photo);
    if (first == nullptr) {
      first = &photo;
      if (dataset.feature_dim != 0 && photo.features.size() != dataset.feature_dim) {
        throw ValidationError("photo " + photo.id + " has dimension " + std::to_string(photo.features.size()) +
                              ", dataset expects " + std::to_string(dataset.feature_dim));
      }
    } else if (photo.features.size() != first->features.size()) {
      throw ValidationError("feature dimension mismatch between photos " + first->id + " (" +
                            std::to_string(first->features.size()) + ") and " + photo.id + " (" +
                            std::to_string(photo.features.size()) + ")");
    }
    if (photo.house_id && !dataset.houses.contains(*photo.house_id)) {
      throw ValidationError("photo " + photo.id + " references unknown house '" + *photo.house_id + "'");
    }
  }
  for (const auto& [id, house] : dataset.houses) {
    if (id != house.id) throw ValidationError("house key '" + id + "' does not match record id '" + house.id + "'");
    validate(house);
    for (const auto& pid : house.photo_ids) {
      if (!dataset.photos.contains(pid)) {
        throw ValidationError("house " + house.id + " references unknown photo '" + pid + "'");
      }
    }
  }
}

}  // namespace luxappraise
