#pragma once

// Task batches, simulated annotation campaigns and the canonical annotation
// export shared by the library pipeline and the annotation service.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "luxappraise/anchor_set.hpp"
#include "luxappraise/crowd_tasks.hpp"
#include "luxappraise/jsonl.hpp"
#include "luxappraise/records.hpp"
#include "luxappraise/rng.hpp"
#include "luxappraise/synthetic_world.hpp"

namespace luxappraise {

struct CatchKeyOptions {
  /// Same threshold the key is authored against.
  double similarity_threshold = 1.0;
  /// Every gallery photo's distance must be this far from the threshold.
  double margin = 1.5;
  std::size_t max_attempts = 20000;
};

/// Keys a grid as a catch trial from latent luxury: the expected selection
/// is every gallery photo within the threshold of the probe. Returns nullopt
/// when some photo is ambiguous (too close to the threshold).
inline std::optional<std::vector<std::string>> catch_key_from_latents(const GridTask& task, const Dataset& dataset,
                                                                      const CatchKeyOptions& options) {
  const double probe = require_latent(dataset, task.probe);
  std::vector<std::string> expected;
  for (const auto& g : task.gallery) {
    const double distance = std::abs(require_latent(dataset, g) - probe);
    if (std::abs(distance - options.similarity_threshold) < options.margin) return std::nullopt;
    if (distance <= options.similarity_threshold) expected.push_back(g);
  }
  return expected;
}

/// `count` regular grid tasks for one room, plus round(catch_fraction * count)
/// catch tasks keyed from latents (requires `dataset` when catch_fraction > 0).
inline std::vector<GridTask> make_grid_tasks(const StrataIndex& strata, RoomCategory room, std::size_t count,
                                             std::uint64_t seed, double catch_fraction = 0.0,
                                             const Dataset* dataset = nullptr, const CatchKeyOptions& keys = {}) {
  if (!(catch_fraction >= 0.0 && catch_fraction <= 1.0)) throw ValidationError("catch fraction must be in [0,1]");
  std::vector<GridTask> tasks;
  std::set<std::string> ids;
  const std::uint64_t room_seed = derive_seed(seed, to_string(room));
  for (std::size_t i = 0; i < count; ++i) {
    auto task = make_grid_task(strata, room, derive_seed(room_seed, i));
    if (!ids.insert(task.id).second) throw ValidationError("task id collision: " + task.id);
    tasks.push_back(std::move(task));
  }
  const auto catches = static_cast<std::size_t>(std::llround(catch_fraction * static_cast<double>(count)));
  if (catches > 0 && dataset == nullptr) throw ValidationError("catch trials need a dataset with latent luxury");
  const std::uint64_t catch_seed = derive_seed(room_seed, "catch");
  std::uint64_t attempt = 0;
  for (std::size_t c = 0; c < catches; ++c) {
    for (;;) {
      if (attempt >= keys.max_attempts * catches) {
        throw ValidationError("could not author an unambiguous catch grid for " + std::string(to_string(room)));
      }
      auto task = make_grid_task(strata, room, derive_seed(catch_seed, attempt++));
      auto key = catch_key_from_latents(task, *dataset, keys);
      if (!key) continue;
      task.id = "catch-" + task.id;
      task.is_catch = true;
      task.catch_expected = std::move(*key);
      if (!ids.insert(task.id).second) continue;
      tasks.push_back(std::move(task));
      break;
    }
  }
  return tasks;
}

/// One anchor task per probe, plus round(catch_fraction * |probes|) catch
/// tasks over probes drawn from `catch_pool`, keyed by clamp(round(latent)).
inline std::vector<AnchorTask> make_anchor_tasks(const std::vector<std::string>& probes, const AnchorSet& anchors,
                                                 std::uint64_t seed, double catch_fraction = 0.0,
                                                 const Dataset* dataset = nullptr,
                                                 const std::vector<std::string>& catch_pool = {}) {
  if (!(catch_fraction >= 0.0 && catch_fraction <= 1.0)) throw ValidationError("catch fraction must be in [0,1]");
  std::vector<AnchorTask> tasks;
  std::set<std::string> ids;
  for (const auto& probe : probes) {
    auto task = make_anchor_task(probe, anchors, anchors.room, seed);
    if (!ids.insert(task.id).second) throw ValidationError("task id collision: " + task.id);
    tasks.push_back(std::move(task));
  }
  const auto catches = static_cast<std::size_t>(std::llround(catch_fraction * static_cast<double>(probes.size())));
  if (catches == 0) return tasks;
  if (dataset == nullptr) throw ValidationError("catch trials need a dataset with latent luxury");
  std::vector<std::string> pool;
  for (const auto& id : catch_pool) {
    if (!anchors.contains(id)) pool.push_back(id);
  }
  if (pool.empty()) throw ValidationError("no photos available for anchor catch trials");
  Rng rng(derive_seed(seed, "anchor-catch", to_string(anchors.room)));
  for (std::size_t c = 0; c < catches; ++c) {
    const auto& probe = pool[static_cast<std::size_t>(rng.below(pool.size()))];
    auto task = make_anchor_task(probe, anchors, anchors.room, derive_seed(seed, c));
    task.id = "catch-" + task.id + "-" + std::to_string(c);
    task.is_catch = true;
    task.catch_expected = level_from_latent(require_latent(*dataset, probe));
    ids.insert(task.id);
    tasks.push_back(std::move(task));
  }
  return tasks;
}

// ---------------------------------------------------------------------------
// Simulated campaigns

struct AnnotationBatch {
  std::vector<GridResponse> grid;
  std::vector<AnchorResponse> anchor;
};

/// Seed of the simulated answer of `worker` to `task_id`.
inline std::uint64_t response_seed(std::uint64_t seed, const std::string& task_id, const std::string& worker) {
  return derive_seed(seed, task_id, worker);
}

struct SimulatedCrowd {
  std::vector<std::string> workers = {"sim-1", "sim-2", "sim-3"};
  AnnotatorModel model;
  /// Per-worker overrides of `model`.
  std::map<std::string, AnnotatorModel> overrides;
  std::uint64_t seed = 0;

  const AnnotatorModel& model_for(const std::string& worker) const {
    const auto it = overrides.find(worker);
    return it != overrides.end() ? it->second : model;
  }
};

inline GridResponse simulate_answer(const SimulatedCrowd& crowd, const GridTask& task, const std::string& worker,
                                    const Dataset& dataset) {
  auto r = simulate_grid_response(task, dataset, crowd.model_for(worker), response_seed(crowd.seed, task.id, worker));
  r.worker_id = worker;
  return r;
}

inline AnchorResponse simulate_answer(const SimulatedCrowd& crowd, const AnchorTask& task, const std::string& worker,
                                      const Dataset& dataset) {
  AnchorResponse r;
  r.task_id = task.id;
  r.worker_id = worker;
  r.level = simulate_anchor_response(dataset.photo(task.probe), crowd.model_for(worker),
                                     response_seed(crowd.seed, task.id, worker));
  return r;
}

/// Every worker answers every task once.
inline AnnotationBatch simulate_campaign(const TaskSet& tasks, const Dataset& dataset, const SimulatedCrowd& crowd) {
  AnnotationBatch batch;
  for (const auto& task : tasks.grid) {
    for (const auto& w : crowd.workers) batch.grid.push_back(simulate_answer(crowd, task, w, dataset));
  }
  for (const auto& task : tasks.anchor) {
    for (const auto& w : crowd.workers) batch.anchor.push_back(simulate_answer(crowd, task, w, dataset));
  }
  return batch;
}

// ---------------------------------------------------------------------------
// Export

struct TripletRecord {
  std::string task_id;
  std::string worker_id;
  RoomCategory room;
  Triplet triplet;
};

struct AnchorLabel {
  std::string photo_id;
  RoomCategory room;
  LuxuryLevel level{1};
  std::size_t responses = 0;
};

struct AnnotationExport {
  std::vector<TripletRecord> triplets;
  std::vector<AnchorLabel> labels;
  std::vector<WorkerReport> workers;
};

/// Canonical, order-independent export: workers flagged by their catch
/// trials are dropped; triplets come from the remaining non-catch grid
/// answers (by task id, then worker id) and labels are the lower median per
/// probe photo (by photo id).
inline AnnotationExport export_annotations(const TaskSet& tasks, const AnnotationBatch& batch) {
  std::map<std::string, const GridTask*> grid_tasks;
  for (const auto& t : tasks.grid) grid_tasks.emplace(t.id, &t);
  std::map<std::string, const AnchorTask*> anchor_tasks;
  for (const auto& t : tasks.anchor) anchor_tasks.emplace(t.id, &t);

  std::map<std::string, std::vector<CatchResult>> catches;
  std::set<std::string> workers;
  for (const auto& r : batch.grid) {
    const auto it = grid_tasks.find(r.task_id);
    if (it == grid_tasks.end()) throw ValidationError("response for unknown grid task " + r.task_id);
    workers.insert(r.worker_id);
    if (it->second->is_catch) catches[r.worker_id].emplace_back(std::pair(*it->second, r));
  }
  for (const auto& r : batch.anchor) {
    const auto it = anchor_tasks.find(r.task_id);
    if (it == anchor_tasks.end()) throw ValidationError("response for unknown anchor task " + r.task_id);
    workers.insert(r.worker_id);
    if (it->second->is_catch) catches[r.worker_id].emplace_back(std::pair(*it->second, r));
  }

  AnnotationExport out;
  std::set<std::string> excluded;
  for (const auto& w : workers) {
    const auto& results = catches[w];
    auto report = score_worker(w, results);
    if (report.flagged) excluded.insert(w);
    out.workers.push_back(std::move(report));
  }

  std::vector<const GridResponse*> grid;
  for (const auto& r : batch.grid) {
    if (!excluded.contains(r.worker_id) && !grid_tasks.at(r.task_id)->is_catch) grid.push_back(&r);
  }
  std::sort(grid.begin(), grid.end(), [](const GridResponse* a, const GridResponse* b) {
    return std::tie(a->task_id, a->worker_id) < std::tie(b->task_id, b->worker_id);
  });
  for (const auto* r : grid) {
    const auto& task = *grid_tasks.at(r->task_id);
    for (auto& t : extract_triplets(task, *r)) out.triplets.push_back({r->task_id, r->worker_id, task.room, std::move(t)});
  }

  std::map<std::string, std::pair<RoomCategory, std::vector<LuxuryLevel>>> levels;
  for (const auto& r : batch.anchor) {
    const auto& task = *anchor_tasks.at(r.task_id);
    if (excluded.contains(r.worker_id) || task.is_catch) continue;
    auto& entry = levels[task.probe];
    entry.first = task.room;
    entry.second.push_back(r.level);
  }
  for (const auto& [photo, entry] : levels) {
    out.labels.push_back({photo, entry.first, lower_median(entry.second), entry.second.size()});
  }
  return out;
}

inline Json to_json(const TripletRecord& t) {
  Json j;
  j["task_id"] = t.task_id;
  j["worker_id"] = t.worker_id;
  j["room"] = std::string(to_string(t.room));
  j["probe"] = t.triplet.probe;
  j["similar"] = t.triplet.similar;
  j["dissimilar"] = t.triplet.dissimilar;
  return j;
}

inline Json to_json(const AnchorLabel& l) {
  Json j;
  j["photo_id"] = l.photo_id;
  j["room"] = std::string(to_string(l.room));
  j["level"] = l.level.value();
  j["responses"] = l.responses;
  return j;
}

inline Json to_json(const WorkerReport& w) {
  Json j;
  j["worker_id"] = w.worker_id;
  j["catches"] = w.catches;
  j["passed"] = w.passed;
  j["score"] = w.score;
  j["flagged"] = w.flagged;
  return j;
}

struct ExportPaths {
  std::filesystem::path triplets;
  std::filesystem::path labels;
  std::filesystem::path workers;
};

inline ExportPaths export_paths(const std::filesystem::path& dir) {
  return {dir / "triplets.jsonl", dir / "anchor_labels.jsonl", dir / "workers.jsonl"};
}

inline ExportPaths write_export(const AnnotationExport& e, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto paths = export_paths(dir);
  std::vector<Json> lines;
  for (const auto& t : e.triplets) lines.push_back(to_json(t));
  write_jsonl(paths.triplets, lines);
  lines.clear();
  for (const auto& l : e.labels) lines.push_back(to_json(l));
  write_jsonl(paths.labels, lines);
  lines.clear();
  for (const auto& w : e.workers) lines.push_back(to_json(w));
  write_jsonl(paths.workers, lines);
  return paths;
}

inline std::vector<TripletRecord> load_triplets(const std::filesystem::path& path) {
  std::vector<TripletRecord> out;
  read_jsonl(path, [&](const Json& j, std::size_t) {
    TripletRecord t{j.value("task_id", ""), j.value("worker_id", ""), parse_room(j.at("room").get<std::string>()),
                    {j.at("probe").get<std::string>(), j.at("similar").get<std::string>(),
                     j.at("dissimilar").get<std::string>()}};
    validate(t.triplet);
    out.push_back(std::move(t));
  });
  return out;
}

inline std::vector<AnchorLabel> load_anchor_labels(const std::filesystem::path& path) {
  std::vector<AnchorLabel> out;
  read_jsonl(path, [&](const Json& j, std::size_t) {
    out.push_back({j.at("photo_id").get<std::string>(), parse_room(j.at("room").get<std::string>()),
                   LuxuryLevel(j.at("level").get<int>()), j.value("responses", std::size_t{0})});
  });
  return out;
}

/// Ordering key for anchor levels: latent luxury when known, otherwise a
/// source-specific stand-in (houzz budget, zillow price-mean rank, places
/// mid-scale, google low).
inline std::map<std::string, double> luxury_proxy(const Dataset& dataset, const std::vector<std::string>& photo_ids) {
  std::vector<double> price_means;
  const auto house_of = photo_house_index(dataset);
  for (const auto& [hid, house] : dataset.houses) price_means.push_back(price_mean(house));
  std::sort(price_means.begin(), price_means.end());
  std::map<std::string, double> proxy;
  for (const auto& id : photo_ids) {
    const auto& photo = dataset.photo(id);
    if (photo.latent_luxury) {
      proxy[id] = *photo.latent_luxury;
      continue;
    }
    switch (photo.source) {
      case PhotoSource::kHouzz:
        if (photo.budget_level) {
          proxy[id] = 2.0 * *photo.budget_level;
          continue;
        }
        break;
      case PhotoSource::kZillow: {
        const auto it = house_of.find(id);
        if (it != house_of.end() && !price_means.empty()) {
          const double m = price_mean(dataset.house(it->second));
          const auto rank = std::lower_bound(price_means.begin(), price_means.end(), m) - price_means.begin();
          proxy[id] = 8.0 * static_cast<double>(rank) / static_cast<double>(price_means.size());
          continue;
        }
        break;
      }
      case PhotoSource::kPlaces:
        proxy[id] = 4.0;
        continue;
      case PhotoSource::kGoogle:
        proxy[id] = 1.0;
        continue;
      case PhotoSource::kSynthetic:
        break;
    }
    throw ValidationError("no luxury proxy available for photo " + id);
  }
  return proxy;
}

}  // namespace luxappraise
