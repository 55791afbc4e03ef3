#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "luxappraise/jsonl.hpp"
#include "luxappraise/records.hpp"

namespace luxappraise {

/// The 8 representative photos of one room, in level order.
struct AnchorSet {
  RoomCategory room = RoomCategory::kBathroom;
  /// anchors[i] represents level i + 1.
  std::array<std::string, LuxuryLevel::kCount> anchors;
  /// centroids[i] is the embedding centroid of level i + 1's cluster.
  std::array<std::vector<double>, LuxuryLevel::kCount> centroids;

  const std::string& anchor(LuxuryLevel level) const { return anchors[level.index()]; }

  bool contains(const std::string& photo_id) const {
    for (const auto& a : anchors) {
      if (a == photo_id) return true;
    }
    return false;
  }

  bool operator==(const AnchorSet&) const = default;
};

inline void validate(const AnchorSet& set) {
  std::set<std::string> distinct(set.anchors.begin(), set.anchors.end());
  if (distinct.size() != set.anchors.size() || distinct.contains("")) {
    throw ValidationError("anchor set for " + std::string(to_string(set.room)) + " needs 8 distinct anchors");
  }
}

/// One line per (room, level): {room, level, photo_id, centroid}.
inline void save_anchor_sets(const std::filesystem::path& path, const std::map<RoomCategory, AnchorSet>& sets) {
  std::vector<Json> lines;
  for (const auto& [room, set] : sets) {
    for (std::size_t i = 0; i < set.anchors.size(); ++i) {
      Json j;
      j["room"] = std::string(to_string(room));
      j["level"] = static_cast<int>(i) + 1;
      j["photo_id"] = set.anchors[i];
      j["centroid"] = set.centroids[i];
      lines.push_back(std::move(j));
    }
  }
  write_jsonl(path, lines);
}

inline std::map<RoomCategory, AnchorSet> load_anchor_sets(const std::filesystem::path& path) {
  std::map<RoomCategory, AnchorSet> sets;
  std::map<RoomCategory, std::set<int>> seen;
  read_jsonl(path, [&](const Json& j, std::size_t) {
    const RoomCategory room = parse_room(j.at("room").get<std::string>());
    const LuxuryLevel level(j.at("level").get<int>());
    auto& set = sets[room];
    set.room = room;
    if (!seen[room].insert(level.value()).second) {
      throw ValidationError("duplicate anchor level " + std::to_string(level.value()) + " for " +
                            std::string(to_string(room)));
    }
    set.anchors[level.index()] = j.at("photo_id").get<std::string>();
    set.centroids[level.index()] = j.at("centroid").get<std::vector<double>>();
  });
  for (const auto& [room, set] : sets) validate(set);
  return sets;
}

}  // namespace luxappraise
