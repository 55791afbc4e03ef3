#pragma once

// Grid and anchor crowdsourcing tasks: stratified task construction, triplet
// extraction from grid answers, anchor-label aggregation and catch-trial
// scoring of workers.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "luxappraise/anchor_set.hpp"
#include "luxappraise/jsonl.hpp"
#include "luxappraise/records.hpp"
#include "luxappraise/rng.hpp"

namespace luxappraise {

inline constexpr std::size_t kGallerySize = 9;
inline constexpr std::size_t kGridPhotos = kGallerySize + 1;

struct GridTask {
  std::string id;
  std::string probe;
  std::vector<std::string> gallery;
  RoomCategory room = RoomCategory::kBathroom;
  bool is_catch = false;
  std::optional<std::vector<std::string>> catch_expected;

  bool operator==(const GridTask&) const = default;
};

struct GridResponse {
  std::string task_id;
  std::string worker_id;
  std::vector<std::string> selected;
  std::int64_t timestamp = 0;

  bool operator==(const GridResponse&) const = default;
};

struct AnchorTask {
  std::string id;
  std::string probe;
  std::array<std::string, LuxuryLevel::kCount> anchors;
  RoomCategory room = RoomCategory::kBathroom;
  bool is_catch = false;
  std::optional<LuxuryLevel> catch_expected;

  bool operator==(const AnchorTask&) const = default;
};

struct AnchorResponse {
  std::string task_id;
  std::string worker_id;
  LuxuryLevel level{1};
  std::int64_t timestamp = 0;

  bool operator==(const AnchorResponse&) const = default;
};

inline void validate(const GridTask& task) {
  if (task.gallery.size() != kGallerySize) {
    throw ValidationError("grid task " + task.id + " must have exactly 9 gallery photos");
  }
  std::set<std::string> ids(task.gallery.begin(), task.gallery.end());
  if (ids.size() != kGallerySize) throw ValidationError("grid task " + task.id + " has repeated gallery photos");
  if (ids.contains(task.probe)) throw ValidationError("grid task " + task.id + ": probe appears in gallery");
  if (task.catch_expected) {
    for (const auto& e : *task.catch_expected) {
      if (!ids.contains(e)) throw ValidationError("grid task " + task.id + ": catch key outside gallery");
    }
  }
}

inline void validate(const AnchorTask& task) {
  std::set<std::string> ids(task.anchors.begin(), task.anchors.end());
  if (ids.size() != task.anchors.size() || ids.contains("")) {
    throw ValidationError("anchor task " + task.id + " needs 8 distinct anchors");
  }
  if (ids.contains(task.probe)) throw ValidationError("anchor task " + task.id + ": probe is one of its anchors");
}

/// Rejects responses whose selection is not a subset of the gallery.
inline void validate_response(const GridTask& task, const GridResponse& response) {
  std::set<std::string> gallery(task.gallery.begin(), task.gallery.end());
  std::set<std::string> seen;
  for (const auto& s : response.selected) {
    if (!gallery.contains(s)) {
      throw ValidationError("selected photo '" + s + "' is not in the gallery of task " + task.id);
    }
    if (!seen.insert(s).second) throw ValidationError("photo '" + s + "' selected twice");
  }
}

// ---------------------------------------------------------------------------
// Strata

enum class Stratum {
  kZillowLow,
  kZillowHigh,
  kHouzzB1,
  kHouzzB2,
  kHouzzB3,
  kHouzzB4,
  kPlaces,
  kGoogle,
};

inline constexpr std::size_t kStratumCount = 8;

inline constexpr std::array<std::string_view, kStratumCount> kStratumNames = {
    "zillow_low", "zillow_high", "houzz_b1", "houzz_b2", "houzz_b3", "houzz_b4", "places", "google",
};

/// Photos drawn from each stratum for one grid (probe included).
inline constexpr std::array<std::size_t, kStratumCount> kGridRecipe = {1, 1, 1, 1, 1, 1, 2, 2};

constexpr std::string_view to_string(Stratum s) { return kStratumNames[static_cast<std::size_t>(s)]; }

struct StrataIndex {
  /// strata[room][stratum] -> photo ids in ascending order.
  std::array<std::array<std::vector<std::string>, kStratumCount>, kRoomCount> strata;

  const std::vector<std::string>& at(RoomCategory room, Stratum s) const {
    return strata[room_index(room)][static_cast<std::size_t>(s)];
  }
  std::vector<std::string>& at(RoomCategory room, Stratum s) { return strata[room_index(room)][static_cast<std::size_t>(s)]; }
};

using RoomLookup = std::map<std::string, RoomCategory>;

/// Mean of offered price and Zestimate, the quantity zillow houses are split on.
inline double price_mean(const HouseRecord& house) {
  return 0.5 * (house.metadata.offered_price + house.metadata.zestimate);
}

/// Resolves the house of a photo: explicit house_id first, else the house listing it.
inline std::map<std::string, std::string> photo_house_index(const Dataset& dataset) {
  std::map<std::string, std::string> index;
  for (const auto& [hid, house] : dataset.houses) {
    for (const auto& pid : house.photo_ids) index.emplace(pid, hid);
  }
  for (const auto& [pid, photo] : dataset.photos) {
    if (photo.house_id) index[pid] = *photo.house_id;
  }
  return index;
}

/// Buckets photos per room into the eight sampling strata. Rooms come from
/// `rooms` when given (e.g. classifier output), else from room_true; photos
/// with no known room are skipped.
inline StrataIndex build_strata(const Dataset& dataset, const RoomLookup* rooms = nullptr) {
  const auto house_of = photo_house_index(dataset);

  std::set<std::string> zillow_houses;
  for (const auto& [pid, photo] : dataset.photos) {
    if (photo.source != PhotoSource::kZillow) continue;
    const auto it = house_of.find(pid);
    if (it == house_of.end() || !dataset.houses.contains(it->second)) {
      throw ValidationError("zillow photo " + pid + " has no resolvable house");
    }
    zillow_houses.insert(it->second);
  }
  std::vector<double> means;
  means.reserve(zillow_houses.size());
  for (const auto& hid : zillow_houses) means.push_back(price_mean(dataset.houses.at(hid)));
  std::sort(means.begin(), means.end());
  double median = 0.0;
  if (!means.empty()) {
    const std::size_t n = means.size();
    median = n % 2 == 1 ? means[n / 2] : 0.5 * (means[n / 2 - 1] + means[n / 2]);
  }

  StrataIndex index;
  for (const auto& [pid, photo] : dataset.photos) {
    std::optional<RoomCategory> room = photo.room_true;
    if (rooms != nullptr) {
      const auto it = rooms->find(pid);
      room = it != rooms->end() ? std::optional(it->second) : std::nullopt;
    }
    if (!room) continue;
    switch (photo.source) {
      case PhotoSource::kZillow: {
        const bool high = price_mean(dataset.houses.at(house_of.at(pid))) > median;
        index.at(*room, high ? Stratum::kZillowHigh : Stratum::kZillowLow).push_back(pid);
        break;
      }
      case PhotoSource::kHouzz:
        if (photo.budget_level) {
          index.at(*room, static_cast<Stratum>(static_cast<int>(Stratum::kHouzzB1) + *photo.budget_level - 1))
              .push_back(pid);
        }
        break;
      case PhotoSource::kPlaces:
        index.at(*room, Stratum::kPlaces).push_back(pid);
        break;
      case PhotoSource::kGoogle:
        index.at(*room, Stratum::kGoogle).push_back(pid);
        break;
      case PhotoSource::kSynthetic:
        break;
    }
  }
  return index;
}

inline std::string hex_id(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

/// Samples one grid: 1 photo per zillow class, 1 per houzz budget level,
/// 2 places and 2 google, then a uniformly chosen probe among the ten.
inline GridTask make_grid_task(const StrataIndex& strata, RoomCategory room, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "grid"));
  std::vector<std::string> drawn;
  drawn.reserve(kGridPhotos);
  for (std::size_t s = 0; s < kStratumCount; ++s) {
    const auto stratum = static_cast<Stratum>(s);
    const auto& pool = strata.at(room, stratum);
    const std::size_t need = kGridRecipe[s];
    if (pool.size() < need) {
      throw ValidationError("room " + std::string(to_string(room)) + ": stratum " + std::string(to_string(stratum)) +
                            " has " + std::to_string(pool.size()) + " photos, need " + std::to_string(need));
    }
    // Partial Fisher-Yates over an index vector draws without replacement.
    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = 0; i < need; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
      std::swap(order[i], order[j]);
      drawn.push_back(pool[order[i]]);
    }
  }
  const std::size_t probe_at = static_cast<std::size_t>(rng.below(drawn.size()));
  GridTask task;
  task.room = room;
  task.probe = drawn[probe_at];
  drawn.erase(drawn.begin() + static_cast<std::ptrdiff_t>(probe_at));
  rng.shuffle(drawn);
  task.gallery = std::move(drawn);
  task.id = "grid-" + std::string(to_string(room)) + "-" + hex_id(derive_seed(seed, "id"));
  validate(task);
  return task;
}

/// All (probe, s, u) with s selected and u not selected, in gallery order.
inline std::vector<Triplet> extract_triplets(const GridTask& task, const GridResponse& response) {
  validate_response(task, response);
  const std::set<std::string> selected(response.selected.begin(), response.selected.end());
  std::vector<Triplet> triplets;
  triplets.reserve(selected.size() * (kGallerySize - selected.size()));
  for (const auto& s : task.gallery) {
    if (!selected.contains(s)) continue;
    for (const auto& u : task.gallery) {
      if (selected.contains(u)) continue;
      triplets.push_back({task.probe, s, u});
    }
  }
  return triplets;
}

inline AnchorTask make_anchor_task(const std::string& probe, const AnchorSet& anchors, RoomCategory room,
                                   std::uint64_t seed) {
  if (anchors.room != room) {
    throw ValidationError("anchor set is for " + std::string(to_string(anchors.room)) + ", task room is " +
                          std::string(to_string(room)));
  }
  if (anchors.contains(probe)) throw ValidationError("photo " + probe + " is an anchor and cannot rate itself");
  AnchorTask task;
  task.probe = probe;
  task.anchors = anchors.anchors;
  task.room = room;
  task.id = "anchor-" + std::string(to_string(room)) + "-" + hex_id(derive_seed(seed, "anchor", probe));
  validate(task);
  return task;
}

/// Lower median: the middle value for odd counts, the smaller middle for even.
inline LuxuryLevel lower_median(std::vector<LuxuryLevel> levels) {
  if (levels.empty()) throw ValidationError("cannot aggregate an empty set of luxury levels");
  std::sort(levels.begin(), levels.end());
  return levels[(levels.size() - 1) / 2];
}

inline LuxuryLevel aggregate_anchor_labels(std::span<const AnchorResponse> responses) {
  if (responses.empty()) throw ValidationError("cannot aggregate an empty response list");
  std::vector<LuxuryLevel> levels;
  levels.reserve(responses.size());
  for (const auto& r : responses) {
    if (r.task_id != responses.front().task_id) {
      throw ValidationError("responses span tasks " + responses.front().task_id + " and " + r.task_id);
    }
    levels.push_back(r.level);
  }
  return lower_median(std::move(levels));
}

// ---------------------------------------------------------------------------
// Catch trials

inline constexpr double kExclusionThreshold = 0.8;

using CatchResult = std::variant<std::pair<GridTask, GridResponse>, std::pair<AnchorTask, AnchorResponse>>;

struct WorkerReport {
  std::string worker_id;
  std::size_t catches = 0;
  std::size_t passed = 0;
  /// Pass fraction; 1.0 when the worker has seen no catch trials.
  double score = 1.0;
  bool flagged = false;

  bool operator==(const WorkerReport&) const = default;
};

inline bool passes_catch(const GridTask& task, const GridResponse& response) {
  if (!task.is_catch || !task.catch_expected) throw ValidationError("task " + task.id + " is not a keyed catch trial");
  validate_response(task, response);
  const std::set<std::string> got(response.selected.begin(), response.selected.end());
  const std::set<std::string> want(task.catch_expected->begin(), task.catch_expected->end());
  return got == want;
}

inline bool passes_catch(const AnchorTask& task, const AnchorResponse& response) {
  if (!task.is_catch || !task.catch_expected) throw ValidationError("task " + task.id + " is not a keyed catch trial");
  return std::abs(response.level.value() - task.catch_expected->value()) <= 1;
}

inline WorkerReport score_worker(const std::string& worker_id, std::span<const CatchResult> catch_results) {
  WorkerReport report;
  report.worker_id = worker_id;
  for (const auto& result : catch_results) {
    const bool pass = std::visit([](const auto& pair) { return passes_catch(pair.first, pair.second); }, result);
    ++report.catches;
    if (pass) ++report.passed;
  }
  if (report.catches > 0) {
    report.score = static_cast<double>(report.passed) / static_cast<double>(report.catches);
  }
  report.flagged = report.score < kExclusionThreshold;
  return report;
}

// ---------------------------------------------------------------------------
// Record codecs

inline Json to_json(const GridTask& t) {
  Json j;
  j["id"] = t.id;
  j["kind"] = "grid";
  j["room"] = std::string(to_string(t.room));
  j["probe"] = t.probe;
  j["gallery"] = t.gallery;
  j["is_catch"] = t.is_catch;
  if (t.catch_expected) j["catch_expected"] = *t.catch_expected;
  return j;
}

inline Json to_json(const AnchorTask& t) {
  Json j;
  j["id"] = t.id;
  j["kind"] = "anchor";
  j["room"] = std::string(to_string(t.room));
  j["probe"] = t.probe;
  j["anchors"] = t.anchors;
  j["is_catch"] = t.is_catch;
  if (t.catch_expected) j["catch_expected"] = t.catch_expected->value();
  return j;
}

inline GridTask grid_task_from_json(const Json& j) {
  GridTask t;
  t.id = j.at("id").get<std::string>();
  t.room = parse_room(j.at("room").get<std::string>());
  t.probe = j.at("probe").get<std::string>();
  t.gallery = j.at("gallery").get<std::vector<std::string>>();
  t.is_catch = j.value("is_catch", false);
  if (j.contains("catch_expected")) t.catch_expected = j.at("catch_expected").get<std::vector<std::string>>();
  validate(t);
  return t;
}

inline AnchorTask anchor_task_from_json(const Json& j) {
  AnchorTask t;
  t.id = j.at("id").get<std::string>();
  t.room = parse_room(j.at("room").get<std::string>());
  t.probe = j.at("probe").get<std::string>();
  const auto anchors = j.at("anchors").get<std::vector<std::string>>();
  if (anchors.size() != LuxuryLevel::kCount) throw ValidationError("anchor task " + t.id + " needs 8 anchors");
  std::copy(anchors.begin(), anchors.end(), t.anchors.begin());
  t.is_catch = j.value("is_catch", false);
  if (j.contains("catch_expected")) t.catch_expected = LuxuryLevel(j.at("catch_expected").get<int>());
  validate(t);
  return t;
}

inline Json to_json(const GridResponse& r) {
  Json j;
  j["task_id"] = r.task_id;
  j["worker_id"] = r.worker_id;
  j["selected"] = r.selected;
  j["timestamp"] = r.timestamp;
  return j;
}

inline Json to_json(const AnchorResponse& r) {
  Json j;
  j["task_id"] = r.task_id;
  j["worker_id"] = r.worker_id;
  j["level"] = r.level.value();
  j["timestamp"] = r.timestamp;
  return j;
}

inline GridResponse grid_response_from_json(const Json& j) {
  GridResponse r;
  r.task_id = j.at("task_id").get<std::string>();
  r.worker_id = j.at("worker_id").get<std::string>();
  r.selected = j.at("selected").get<std::vector<std::string>>();
  r.timestamp = j.value("timestamp", std::int64_t{0});
  return r;
}

inline AnchorResponse anchor_response_from_json(const Json& j) {
  AnchorResponse r;
  r.task_id = j.at("task_id").get<std::string>();
  r.worker_id = j.at("worker_id").get<std::string>();
  r.level = LuxuryLevel(j.at("level").get<int>());
  r.timestamp = j.value("timestamp", std::int64_t{0});
  return r;
}

/// A task file may mix grid and anchor tasks; the "kind" key tells them apart.
struct TaskSet {
  std::vector<GridTask> grid;
  std::vector<AnchorTask> anchor;
};

inline TaskSet load_tasks(const std::filesystem::path& path) {
  TaskSet set;
  read_jsonl(path, [&](const Json& j, std::size_t) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "grid") {
      set.grid.push_back(grid_task_from_json(j));
    } else if (kind == "anchor") {
      set.anchor.push_back(anchor_task_from_json(j));
    } else {
      throw ValidationError("unknown task kind '" + kind + "'");
    }
  });
  return set;
}

inline void save_tasks(const std::filesystem::path& path, const TaskSet& set) {
  std::vector<Json> lines;
  for (const auto& t : set.grid) lines.push_back(to_json(t));
  for (const auto& t : set.anchor) lines.push_back(to_json(t));
  write_jsonl(path, lines);
}

}  // namespace luxappraise
