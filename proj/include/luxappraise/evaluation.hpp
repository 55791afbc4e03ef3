#pragma once

// End-to-end valuation pipeline and the ablation protocol: room classifier,
// simulated crowd elicitation (grid -> triplets -> t-STE -> anchors -> anchor
// labels), luxury classifiers, per-house representations and SVR, scored by
// median error rate on the test split.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "luxappraise/campaign.hpp"
#include "luxappraise/classifiers.hpp"
#include "luxappraise/crowd_tasks.hpp"
#include "luxappraise/embedding.hpp"
#include "luxappraise/jsonl.hpp"
#include "luxappraise/metrics.hpp"
#include "luxappraise/records.hpp"
#include "luxappraise/rng.hpp"
#include "luxappraise/synthetic_world.hpp"
#include "luxappraise/valuation.hpp"

namespace luxappraise {

struct PipelineConfig {
  AnnotatorModel annotator;
  std::size_t workers_per_task = 3;
  std::size_t grid_tasks_per_room = 150;
  /// Photos per room sent to anchor classification.
  std::size_t labels_per_room = 250;
  std::size_t embedding_dim = 2;
  double tste_alpha = 1.0;
  std::size_t tste_iters = 1000;
  /// Cap on the room classifier's training sample.
  std::size_t room_train_max = 6000;
  SoftmaxConfig room_softmax;
  SoftmaxConfig luxury_softmax;
  bool tune = true;
  /// Cap on the houses used for cross-validation.
  std::size_t tune_max_samples = 600;
  std::size_t folds = 5;
  /// Used when tune is false.
  SvrParams svr;
};

inline Json to_json(const PipelineConfig& c) {
  Json j;
  j["annotator"] = to_json(c.annotator);
  j["workers_per_task"] = c.workers_per_task;
  j["grid_tasks_per_room"] = c.grid_tasks_per_room;
  j["labels_per_room"] = c.labels_per_room;
  j["embedding_dim"] = c.embedding_dim;
  j["tste_alpha"] = c.tste_alpha;
  j["tste_iters"] = c.tste_iters;
  j["room_train_max"] = c.room_train_max;
  j["softmax"] = {{"l2_lambda", c.room_softmax.l2_lambda},
                  {"max_iters", c.room_softmax.max_iters},
                  {"learning_rate", c.room_softmax.learning_rate}};
  j["tune"] = c.tune;
  j["tune_max_samples"] = c.tune_max_samples;
  j["folds"] = c.folds;
  j["svr"] = {{"C", c.svr.C}, {"epsilon", c.svr.epsilon}, {"gamma", c.svr.gamma}};
  return j;
}

inline PipelineConfig pipeline_config_from_json(const Json& j) {
  PipelineConfig c;
  if (j.contains("annotator")) c.annotator = annotator_model_from_json(j.at("annotator"));
  c.workers_per_task = j.value("workers_per_task", c.workers_per_task);
  c.grid_tasks_per_room = j.value("grid_tasks_per_room", c.grid_tasks_per_room);
  c.labels_per_room = j.value("labels_per_room", c.labels_per_room);
  c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
  c.tste_alpha = j.value("tste_alpha", c.tste_alpha);
  c.tste_iters = j.value("tste_iters", c.tste_iters);
  c.room_train_max = j.value("room_train_max", c.room_train_max);
  if (j.contains("softmax")) {
    const auto& s = j.at("softmax");
    for (auto* cfg : {&c.room_softmax, &c.luxury_softmax}) {
      cfg->l2_lambda = s.value("l2_lambda", cfg->l2_lambda);
      cfg->max_iters = s.value("max_iters", cfg->max_iters);
      cfg->learning_rate = s.value("learning_rate", cfg->learning_rate);
    }
  }
  c.tune = j.value("tune", c.tune);
  c.tune_max_samples = j.value("tune_max_samples", c.tune_max_samples);
  c.folds = j.value("folds", c.folds);
  if (j.contains("svr")) {
    const auto& s = j.at("svr");
    c.svr.C = s.value("C", c.svr.C);
    c.svr.epsilon = s.value("epsilon", c.svr.epsilon);
    c.svr.gamma = s.value("gamma", c.svr.gamma);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Stages

/// Train houses, their photos, and photos attached to no house. Test houses
/// and their photos are left out entirely.
inline Dataset training_view(const Dataset& dataset) {
  Dataset view;
  view.feature_dim = dataset.feature_dim;
  for (const auto& [id, house] : dataset.houses) {
    if (house.split == Split::kTrain) view.houses.emplace(id, house);
  }
  const auto house_of = photo_house_index(dataset);
  for (const auto& [id, photo] : dataset.photos) {
    const auto it = house_of.find(id);
    if (it == house_of.end() || view.houses.contains(it->second)) view.photos.emplace(id, photo);
  }
  return view;
}

inline std::vector<std::string> room_class_names() { return {kRoomNames.begin(), kRoomNames.end()}; }

inline Matrix feature_matrix(const Dataset& dataset, const std::vector<std::string>& ids) {
  Matrix x(ids.size(), dataset.feature_dim);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const auto& f = dataset.photo(ids[r]).features;
    std::copy(f.begin(), f.end(), x.row(r).begin());
  }
  return x;
}

/// Room classifier trained on photos carrying room_true (capped sample).
inline SoftmaxModel train_room_classifier(const Dataset& view, const PipelineConfig& config, std::uint64_t seed) {
  std::vector<std::string> ids;
  for (const auto& [id, photo] : view.photos) {
    if (photo.room_true) ids.push_back(id);
  }
  if (ids.size() > config.room_train_max) {
    Rng rng(derive_seed(seed, "room-sample"));
    rng.shuffle(ids);
    ids.resize(config.room_train_max);
  }
  std::vector<std::size_t> labels;
  labels.reserve(ids.size());
  for (const auto& id : ids) labels.push_back(room_index(*view.photo(id).room_true));
  auto cfg = config.room_softmax;
  cfg.seed = derive_seed(seed, "room-softmax");
  return softmax_train(feature_matrix(view, ids), labels, room_class_names(), cfg);
}

inline RoomLookup predict_rooms(const SoftmaxModel& room_model, const Dataset& dataset) {
  RoomLookup rooms;
  for (const auto& [id, photo] : dataset.photos) {
    rooms.emplace(id, parse_room(room_model.classes[softmax_predict(room_model, photo.features).label]));
  }
  return rooms;
}

struct RoomElicitation {
  std::size_t grid_tasks = 0;
  std::size_t triplets = 0;
  double satisfaction = 0.0;
  AnchorSet anchors;
};

struct CrowdStage {
  std::map<RoomCategory, RoomElicitation> rooms;
  std::vector<AnchorLabel> labels;
};

/// Simulated elicitation per room: grid tasks -> triplets -> t-STE -> 8-means
/// -> anchors, then anchor tasks over a sample of the room's photos.
inline CrowdStage run_crowd_stage(const Dataset& view, const RoomLookup& rooms, const PipelineConfig& config,
                                  std::uint64_t seed) {
  CrowdStage stage;
  const auto strata = build_strata(view, &rooms);
  SimulatedCrowd crowd;
  crowd.model = config.annotator;
  crowd.seed = derive_seed(seed, "crowd");
  crowd.workers.clear();
  for (std::size_t w = 0; w < config.workers_per_task; ++w) crowd.workers.push_back("sim-" + std::to_string(w + 1));

  for (const RoomCategory room : kAllRooms) {
    RoomElicitation& out = stage.rooms[room];
    TaskSet grid;
    grid.grid = make_grid_tasks(strata, room, config.grid_tasks_per_room, derive_seed(seed, "grid-tasks"));
    out.grid_tasks = grid.grid.size();
    const auto exported = export_annotations(grid, simulate_campaign(grid, view, crowd));
    std::vector<Triplet> triplets;
    triplets.reserve(exported.triplets.size());
    for (const auto& t : exported.triplets) triplets.push_back(t.triplet);
    out.triplets = triplets.size();
    if (triplets.empty()) throw ValidationError("no triplets elicited for " + std::string(to_string(room)));

    TsteConfig tste{config.tste_iters, 1.0, derive_seed(seed, "tste", to_string(room))};
    const auto embedding = fit_embedding(triplets, config.embedding_dim, config.tste_alpha, tste);
    out.satisfaction = triplet_satisfaction(embedding, index_triplets(triplets).triplets);
    const auto clusters = kmeans(embedding.points, LuxuryLevel::kCount, derive_seed(seed, "kmeans", to_string(room)));
    out.anchors = select_anchors(embedding, clusters.assignments, clusters.centroids,
                                 luxury_proxy(view, embedding.photo_ids), room);

    std::vector<std::string> pool;
    for (const auto& [id, r] : rooms) {
      if (r == room && view.photos.contains(id) && !out.anchors.contains(id)) pool.push_back(id);
    }
    Rng rng(derive_seed(seed, "label-sample", to_string(room)));
    rng.shuffle(pool);
    if (pool.size() > config.labels_per_room) pool.resize(config.labels_per_room);
    std::sort(pool.begin(), pool.end());
    TaskSet anchor;
    anchor.anchor = make_anchor_tasks(pool, out.anchors, derive_seed(seed, "anchor-tasks"));
    auto labels = export_annotations(anchor, simulate_campaign(anchor, view, crowd)).labels;
    stage.labels.insert(stage.labels.end(), labels.begin(), labels.end());
  }
  return stage;
}

struct LuxuryModels {
  std::map<RoomCategory, SoftmaxModel> per_room;
  SoftmaxModel global;

  bool operator==(const LuxuryModels&) const = default;
};

/// Trains an 8-level classifier on labeled photos; only levels present in
/// the labels become classes.
inline SoftmaxModel train_level_classifier(const Dataset& dataset, const std::vector<const AnchorLabel*>& labels,
                                           const SoftmaxConfig& config) {
  std::set<int> present;
  for (const auto* l : labels) present.insert(l->level.value());
  std::vector<std::string> classes;
  std::map<int, std::size_t> class_of;
  for (const int level : present) {
    class_of[level] = classes.size();
    classes.push_back(std::to_string(level));
  }
  std::vector<std::string> ids;
  std::vector<std::size_t> y;
  for (const auto* l : labels) {
    ids.push_back(l->photo_id);
    y.push_back(class_of.at(l->level.value()));
  }
  return softmax_train(feature_matrix(dataset, ids), y, classes, config);
}

inline LuxuryModels train_luxury_models(const Dataset& view, const std::vector<AnchorLabel>& labels,
                                        const PipelineConfig& config, std::uint64_t seed) {
  LuxuryModels models;
  std::vector<const AnchorLabel*> all;
  std::map<RoomCategory, std::vector<const AnchorLabel*>> by_room;
  for (const auto& l : labels) {
    all.push_back(&l);
    by_room[l.room].push_back(&l);
  }
  auto cfg = config.luxury_softmax;
  cfg.seed = derive_seed(seed, "luxury-global");
  models.global = train_level_classifier(view, all, cfg);
  for (const auto& [room, subset] : by_room) {
    std::set<int> distinct;
    for (const auto* l : subset) distinct.insert(l->level.value());
    if (distinct.size() < 2) continue;  // falls back to the global model
    cfg.seed = derive_seed(seed, "luxury", to_string(room));
    models.per_room.emplace(room, train_level_classifier(view, subset, cfg));
  }
  return models;
}

inline LuxuryLevel predict_level(const SoftmaxModel& model, std::span<const double> features) {
  return LuxuryLevel(std::stoi(model.classes[softmax_predict(model, features).label]));
}

/// Everything learned from the training split.
struct TrainedPipeline {
  SoftmaxModel room_model;
  LuxuryModels luxury;
  std::map<RoomCategory, AnchorSet> anchors;
  std::vector<AnchorLabel> labels;
  std::map<RepresentationMode, ValuationModel> valuation;
};

/// Per-photo predictions needed to represent any house of the dataset.
struct PhotoInference {
  RoomLookup rooms;
  PhotoPredictions room_levels;
  std::map<std::string, LuxuryLevel> global_levels;
};

inline PhotoInference infer_photos(const Dataset& dataset, const SoftmaxModel& room_model,
                                   const LuxuryModels& luxury) {
  PhotoInference inf;
  for (const auto& [hid, house] : dataset.houses) {
    for (const auto& pid : house.photo_ids) {
      if (inf.rooms.contains(pid)) continue;
      const auto& f = dataset.photo(pid).features;
      const RoomCategory room = parse_room(room_model.classes[softmax_predict(room_model, f).label]);
      inf.rooms.emplace(pid, room);
      const auto it = luxury.per_room.find(room);
      const auto& model = it != luxury.per_room.end() ? it->second : luxury.global;
      inf.room_levels.emplace(pid, PhotoPrediction{room, predict_level(model, f)});
      inf.global_levels.emplace(pid, predict_level(luxury.global, f));
    }
  }
  return inf;
}

inline RepresentationInputs representation_inputs(const Dataset& dataset, const HouseRecord& house,
                                                  RepresentationMode mode, const PhotoInference& inf) {
  RepresentationInputs in;
  switch (mode) {
    case RepresentationMode::kFull:
      in.luxury = aggregate_house_luxury(house, inf.room_levels);
      break;
    case RepresentationMode::kMetadataOnly:
      break;
    case RepresentationMode::kNoRoomClassifier: {
      std::vector<LuxuryLevel> levels;
      for (const auto& pid : house.photo_ids) levels.push_back(inf.global_levels.at(pid));
      in.pooled_luxury = pooled_luxury(levels);
      break;
    }
    case RepresentationMode::kDirectRegression: {
      std::vector<std::vector<double>> features;
      for (const auto& pid : house.photo_ids) features.push_back(dataset.photo(pid).features);
      in.photo_features = std::move(features);
      in.feature_dim = dataset.feature_dim;
      break;
    }
  }
  return in;
}

inline Matrix representation_matrix(const Dataset& dataset, const std::vector<const HouseRecord*>& houses,
                                    RepresentationMode mode, const Normalizer& normalizer,
                                    const PhotoInference& inf) {
  Matrix x(houses.size(), representation_length(mode, dataset.feature_dim));
  for (std::size_t r = 0; r < houses.size(); ++r) {
    const auto rep =
        build_representation(*houses[r], normalizer, mode, representation_inputs(dataset, *houses[r], mode, inf));
    std::copy(rep.vector.begin(), rep.vector.end(), x.row(r).begin());
  }
  return x;
}

inline std::vector<const HouseRecord*> houses_in(const Dataset& dataset, Split split) {
  std::vector<const HouseRecord*> out;
  for (const auto& [id, house] : dataset.houses) {
    if (house.split == split) out.push_back(&house);
  }
  return out;
}

/// Fits the SVR of one mode on the training houses, tuning on a capped
/// subsample when configured.
inline ValuationModel train_valuation(const Matrix& x, std::span<const double> y, RepresentationMode mode,
                                      std::size_t feature_dim, const Normalizer& normalizer,
                                      const PipelineConfig& config, std::uint64_t seed) {
  ValuationModel model;
  model.mode = mode;
  model.feature_dim = feature_dim;
  model.normalizer = normalizer;
  SvrParams params = config.svr;
  if (config.tune) {
    std::vector<std::size_t> rows(x.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (rows.size() > config.tune_max_samples) {
      Rng rng(derive_seed(seed, "tune-sample", to_string(mode)));
      rng.shuffle(rows);
      rows.resize(config.tune_max_samples);
      std::sort(rows.begin(), rows.end());
    }
    std::vector<double> y_sub;
    for (const auto r : rows) y_sub.push_back(y[r]);
    params = tune_hyperparams(select_rows(x, rows), y_sub, default_svr_grid(x.cols()), config.folds,
                              derive_seed(seed, "tune", to_string(mode)))
                 .best;
  }
  model.svr = svr_fit(x, y, params);
  return model;
}

inline std::vector<double> purchase_prices(const std::vector<const HouseRecord*>& houses) {
  std::vector<double> y;
  y.reserve(houses.size());
  for (const auto* h : houses) {
    if (!h->purchase_price) throw ValidationError("house " + h->id + " has no purchase price");
    y.push_back(*h->purchase_price);
  }
  return y;
}

/// Trains every stage on the training split only.
inline TrainedPipeline train_pipeline(const Dataset& dataset, const std::vector<RepresentationMode>& modes,
                                      const PipelineConfig& config, std::uint64_t seed) {
  const Dataset view = training_view(dataset);
  TrainedPipeline trained;
  trained.room_model = train_room_classifier(view, config, seed);
  const bool needs_luxury = std::any_of(modes.begin(), modes.end(), [](RepresentationMode m) {
    return m == RepresentationMode::kFull || m == RepresentationMode::kNoRoomClassifier;
  });
  PhotoInference inf;
  if (needs_luxury) {
    const auto rooms = predict_rooms(trained.room_model, view);
    auto crowd = run_crowd_stage(view, rooms, config, seed);
    for (const auto& [room, e] : crowd.rooms) trained.anchors.emplace(room, e.anchors);
    trained.labels = std::move(crowd.labels);
    trained.luxury = train_luxury_models(view, trained.labels, config, seed);
    inf = infer_photos(view, trained.room_model, trained.luxury);
  }

  const auto train_houses = houses_in(view, Split::kTrain);
  if (train_houses.size() < 2) throw ValidationError("need at least 2 training houses");
  std::vector<MetadataVector> metadata;
  for (const auto* h : train_houses) metadata.push_back(h->metadata);
  const auto normalizer = fit_normalizer(metadata);
  const auto y = purchase_prices(train_houses);
  for (const auto mode : modes) {
    const auto x = representation_matrix(view, train_houses, mode, normalizer, inf);
    trained.valuation.emplace(mode, train_valuation(x, y, mode, view.feature_dim, normalizer, config, seed));
  }
  return trained;
}

/// Price predictions for the houses of a split.
inline std::vector<double> predict_prices(const Dataset& dataset, const TrainedPipeline& trained,
                                          RepresentationMode mode, const std::vector<const HouseRecord*>& houses) {
  const auto& model = trained.valuation.at(mode);
  PhotoInference inf;
  if (mode == RepresentationMode::kFull || mode == RepresentationMode::kNoRoomClassifier) {
    Dataset subset;
    subset.feature_dim = dataset.feature_dim;
    for (const auto* h : houses) {
      subset.houses.emplace(h->id, *h);
      for (const auto& pid : h->photo_ids) subset.photos.emplace(pid, dataset.photo(pid));
    }
    inf = infer_photos(subset, trained.room_model, trained.luxury);
  }
  const auto x = representation_matrix(dataset, houses, mode, model.normalizer, inf);
  std::vector<double> out;
  out.reserve(houses.size());
  for (std::size_t r = 0; r < x.rows(); ++r) out.push_back(svr_predict(model.svr, x.row(r)));
  return out;
}

// ---------------------------------------------------------------------------
// Ablation

struct AblationRow {
  RepresentationMode mode = RepresentationMode::kFull;
  /// Median across seeds of the per-seed median error rates.
  double median_error = 0.0;
  std::vector<double> per_seed;
  std::vector<SvrParams> params;
  std::size_t samples = 0;
};

struct AblationReport {
  std::vector<AblationRow> rows;
  double zestimate_error = 0.0;
  std::size_t baseline_samples = 0;
  std::vector<std::uint64_t> seeds;
  std::string generated_at;
  Json config;

  const AblationRow& row(RepresentationMode mode) const {
    for (const auto& r : rows) {
      if (r.mode == mode) return r;
    }
    throw NotFoundError("mode " + std::string(to_string(mode)) + " not in report");
  }
};

/// UTC ISO-8601 time; SOURCE_DATE_EPOCH, when set, replaces the clock.
inline std::string report_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

/// Per seed: train on the train split, predict the test split, score each mode.
inline AblationReport run_ablation(const Dataset& dataset, const std::vector<RepresentationMode>& modes,
                                   const PipelineConfig& config, const std::vector<std::uint64_t>& seeds) {
  if (modes.empty()) throw ValidationError("ablation needs at least one mode");
  if (seeds.empty()) throw ValidationError("ablation needs at least one seed");
  std::set<RepresentationMode> distinct(modes.begin(), modes.end());
  if (distinct.size() != modes.size()) throw ValidationError("ablation modes must be distinct");
  const auto test = houses_in(dataset, Split::kTest);
  if (test.empty()) throw ValidationError("dataset has no test split");
  if (houses_in(dataset, Split::kTrain).empty()) throw ValidationError("dataset has no train split");
  const auto actual = purchase_prices(test);

  AblationReport report;
  report.seeds = seeds;
  report.config = to_json(config);
  report.generated_at = report_timestamp();
  std::vector<double> zestimates;
  for (const auto* h : test) zestimates.push_back(h->metadata.zestimate);
  report.zestimate_error = median_error_rate(zestimates, actual);
  report.baseline_samples = test.size();

  for (const auto mode : modes) report.rows.push_back({mode, 0.0, {}, {}, test.size()});
  for (const auto seed : seeds) {
    const auto trained = train_pipeline(dataset, modes, config, seed);
    for (auto& row : report.rows) {
      row.per_seed.push_back(median_error_rate(predict_prices(dataset, trained, row.mode, test), actual));
      row.params.push_back(trained.valuation.at(row.mode).svr.params);
    }
  }
  for (auto& row : report.rows) row.median_error = median(row.per_seed);
  return report;
}

inline std::string format_percent(double fraction) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f%%", 100.0 * fraction);
  return buffer;
}

inline std::string report_table(const AblationReport& report) {
  std::ostringstream out;
  char line[160];
  out << "Median error rate of automated valuation methods\n\n";
  std::snprintf(line, sizeof line, "%-24s %18s %7s %12s\n", "Method", "Median Error Rate", "Seeds", "Test houses");
  out << line;
  std::snprintf(line, sizeof line, "%-24s %18s %7s %12zu\n", "Zestimate (baseline)",
                format_percent(report.zestimate_error).c_str(), "-", report.baseline_samples);
  out << line;
  for (const auto& row : report.rows) {
    std::snprintf(line, sizeof line, "%-24s %18s %7zu %12zu\n", std::string(to_string(row.mode)).c_str(),
                  format_percent(row.median_error).c_str(), row.per_seed.size(), row.samples);
    out << line;
  }
  out << "\nPer-seed median error rates (seeds";
  for (const auto s : report.seeds) out << ' ' << s;
  out << "):\n";
  for (const auto& row : report.rows) {
    std::snprintf(line, sizeof line, "  %-22s", std::string(to_string(row.mode)).c_str());
    out << line;
    for (const double e : row.per_seed) {
      std::snprintf(line, sizeof line, " %.4f", e);
      out << line;
    }
    out << '\n';
  }
  out << "\nReference median error rates at full data scale: Zestimate 7.9%, full 5.8%, "
         "metadata_only 8.0%, no_room_classifier 6.7%, direct_regression 6.6%.\n";
  out << "Generated: " << report.generated_at << '\n';
  return out.str();
}

inline std::vector<Json> report_records(const AblationReport& report) {
  std::vector<Json> lines;
  Json header;
  header["kind"] = "ablation";
  header["generated_at"] = report.generated_at;
  header["seeds"] = report.seeds;
  header["config"] = report.config;
  lines.push_back(std::move(header));
  Json baseline;
  baseline["kind"] = "baseline";
  baseline["method"] = "zestimate";
  baseline["median_error"] = report.zestimate_error;
  baseline["samples"] = report.baseline_samples;
  lines.push_back(std::move(baseline));
  for (const auto& row : report.rows) {
    Json j;
    j["kind"] = "mode";
    j["mode"] = std::string(to_string(row.mode));
    j["median_error"] = row.median_error;
    j["per_seed"] = row.per_seed;
    Json params = Json::array();
    for (const auto& p : row.params) params.push_back({{"C", p.C}, {"epsilon", p.epsilon}, {"gamma", p.gamma}});
    j["svr_params"] = std::move(params);
    j["samples"] = row.samples;
    lines.push_back(std::move(j));
  }
  return lines;
}

/// Writes the aligned table to `path` and the records to `path` with a
/// .jsonl extension. Returns the records path.
inline std::filesystem::path emit_report(const AblationReport& report, const std::filesystem::path& path) {
  if (report.rows.empty()) throw ValidationError("report has no mode rows");
  auto records = path;
  records.replace_extension(".jsonl");
  if (records == path) records += ".records";
  write_text_file(path, report_table(report));
  write_jsonl(records, report_records(report));
  return records;
}

}  // namespace luxappraise
