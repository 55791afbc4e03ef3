// Acceptance run: one PASS/FAIL line per criterion. Arguments select a
// subset of criteria by number; no arguments runs all of them.

#include <chrono>
#include <csignal>
#include <cstdio>
#include <fcntl.h>
#include <fstream>
#include <iostream>
#include <set>
#include <spawn.h>
#include <sys/wait.h>
#include <thread>

#include "httplib.h"
#include "support.hpp"

extern char** environ;

namespace lx = luxappraise;
namespace fs = std::filesystem;
using testing_support::TempDir;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// CLI helpers

pid_t spawn_cli(const std::vector<std::string>& args, const fs::path& output, const std::vector<std::string>& env = {}) {
  std::vector<std::string> full{LUXAPPRAISE_CLI};
  full.insert(full.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : full) argv.push_back(a.data());
  argv.push_back(nullptr);
  std::vector<std::string> env_strings;
  for (char** e = environ; *e != nullptr; ++e) env_strings.emplace_back(*e);
  env_strings.insert(env_strings.end(), env.begin(), env.end());
  std::vector<char*> envp;
  for (auto& e : env_strings) envp.push_back(e.data());
  envp.push_back(nullptr);
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, output.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, full[0].c_str(), &actions, nullptr, argv.data(), envp.data());
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw lx::IoError("cannot start " + full[0]);
  return pid;
}

int wait_for(pid_t pid) {
  int status = 0;
  ::waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void run_cli(const std::vector<std::string>& args, const fs::path& output, const std::vector<std::string>& env = {}) {
  const int code = wait_for(spawn_cli(args, output, env));
  if (code != 0) {
    std::string joined;
    for (const auto& a : args) joined += " " + a;
    throw lx::Error("luxappraise" + joined + " exited with " + std::to_string(code) + "; see " + output.string());
  }
}

std::string fmt(const char* format, double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, format, v);
  return buffer;
}

// ---------------------------------------------------------------------------
// 1. t-STE gradient

Outcome tste_gradient() {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    lx::Rng rng(lx::derive_seed(101, s));
    const std::size_t n = 3 + rng.below(28);
    const std::size_t d = 2 + rng.below(2);
    const double alpha = 1.0 + static_cast<double>(rng.below(2));
    lx::Matrix x(n, d);
    for (auto& v : x.data()) v = rng.normal();
    std::vector<lx::IndexTriplet> triplets;
    const std::size_t count = 1 + rng.below(300);
    while (triplets.size() < count) {
      const std::size_t i = rng.below(n), j = rng.below(n), k = rng.below(n);
      if (i != j && i != k && j != k) triplets.push_back({i, j, k});
    }
    const auto analytic = lx::tste_loss_grad(x, triplets, alpha).gradient.data();
    const auto numeric = testing_support::numeric_gradient(
        [&](const std::vector<double>& v) { return testing_support::reference_tste_loss(v, d, triplets, alpha); },
        x.data());
    worst = std::max(worst, testing_support::max_relative_error(analytic, numeric, 1e-3));
  }
  return {worst < 1e-4, "max relative error " + fmt("%.2e", worst)};
}

// ---------------------------------------------------------------------------
// 2. t-STE recovery

Outcome tste_recovery() {
  const std::size_t n = 60;
  std::vector<std::size_t> group;
  for (std::size_t i = 0; i < n; ++i) group.push_back(i % 3);
  lx::Rng rng(11);
  std::vector<lx::IndexTriplet> triplets;
  while (triplets.size() < 500) {
    const std::size_t i = rng.below(n), j = rng.below(n), k = rng.below(n);
    if (i == j || i == k || j == k) continue;
    if (group[i] == group[j] && group[i] != group[k]) triplets.push_back({i, j, k});
  }
  const auto e = lx::tste_fit(triplets, n, 2, 1.0, {1000, 1.0, 4});
  const double sat = lx::triplet_satisfaction(e, triplets);
  return {sat >= 0.97, "satisfaction " + fmt("%.4f", sat)};
}

// ---------------------------------------------------------------------------
// 3. SVR against the reference dual solver

Outcome svr_equivalence() {
  double worst = 0.0;
  bool feasible = true;
  for (std::uint64_t s = 0; s < 10; ++s) {
    lx::Rng rng(lx::derive_seed(303, s));
    const std::size_t n = 3 + rng.below(13);
    const std::size_t d = 1 + rng.below(4);
    lx::Matrix x(n, d);
    for (auto& v : x.data()) v = rng.normal();
    std::vector<double> y;
    for (std::size_t i = 0; i < n; ++i) y.push_back(2e5 + 5e4 * std::sin(x(i, 0)) + 1e4 * rng.normal());
    const lx::SvrParams params{std::array{1.0, 10.0, 100.0}[rng.below(3)], std::array{0.01, 0.1}[rng.below(2)],
                               std::array{0.05, 0.2, 1.0}[rng.below(3)]};
    lx::SvrOptions options;
    options.tolerance = 1e-7;
    const auto model = lx::svr_fit(x, y, params, options);
    const auto ref = testing_support::reference_svr(x, y, params.C, params.epsilon, params.gamma);
    double sq = 0.0;
    for (std::size_t i = 0; i < n + 10; ++i) {
      std::vector<double> p(d);
      if (i < n) {
        std::copy_n(x.row(i).begin(), d, p.begin());
      } else {
        for (auto& v : p) v = rng.normal();
      }
      const double a = lx::svr_predict(model, p), b = ref.predict(p);
      sq += (a - b) * (a - b);
    }
    // Relative to the spread of the targets, so a constant offset cannot hide.
    const double rel = std::sqrt(sq / static_cast<double>(n + 10)) / ref.y_scale;
    worst = std::max(worst, rel);
    double sum = 0.0;
    for (const double c : model.coefficients) {
      feasible = feasible && std::abs(c) <= params.C * (1 + 1e-12);
      sum += c;
    }
    feasible = feasible && std::abs(sum) <= 1e-6;
  }
  return {worst < 1e-3 && feasible,
          "max relative RMS " + fmt("%.2e", worst) + (feasible ? ", dual feasible" : ", dual INFEASIBLE")};
}

// ---------------------------------------------------------------------------
// 4. Softmax gradient

Outcome softmax_gradient() {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    lx::Rng rng(lx::derive_seed(404, s));
    const std::size_t c = 2 + rng.below(7);
    const std::size_t d = 1 + rng.below(16);
    const std::size_t n = 5 + rng.below(60);
    lx::Matrix x(n, d);
    for (auto& v : x.data()) v = rng.normal();
    std::vector<std::size_t> y;
    for (std::size_t i = 0; i < n; ++i) y.push_back(rng.below(c));
    lx::Matrix w(c, d + 1);
    for (auto& v : w.data()) v = rng.normal(0.0, 0.5);
    const double lambda = 1e-3 * static_cast<double>(1 + rng.below(100));
    const auto analytic = lx::softmax_loss_grad(w, x, y, lambda).gradient.data();
    const auto numeric = testing_support::numeric_gradient(
        [&](const std::vector<double>& v) { return testing_support::reference_softmax_loss(v, c, x, y, lambda); },
        w.data());
    worst = std::max(worst, testing_support::max_relative_error(analytic, numeric, 1e-3));
  }
  return {worst < 1e-4, "max relative error " + fmt("%.2e", worst)};
}

// ---------------------------------------------------------------------------
// 5. Room classifier on the default world

const lx::Dataset& default_world() {
  static const lx::Dataset world = lx::generate_world(lx::WorldConfig{});
  return world;
}

Outcome room_accuracy() {
  const auto& world = default_world();
  const auto model = lx::train_room_classifier(lx::training_view(world), lx::PipelineConfig{}, 1);
  std::vector<std::string> ids;
  std::vector<std::size_t> labels;
  for (const auto* h : lx::houses_in(world, lx::Split::kTest)) {
    for (const auto& pid : h->photo_ids) {
      ids.push_back(pid);
      labels.push_back(lx::room_index(*world.photo(pid).room_true));
    }
  }
  const double acc = lx::evaluate_accuracy(model, lx::feature_matrix(world, ids), labels).accuracy;
  return {acc >= 0.90, "held-out accuracy " + fmt("%.4f", acc) + " on " + std::to_string(ids.size()) + " photos"};
}

// ---------------------------------------------------------------------------
// 6, 7. Ablation

const std::vector<lx::RepresentationMode> kModes(lx::kAllModes.begin(), lx::kAllModes.end());
const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

std::string per_seed_summary(const lx::AblationReport& report) {
  std::string out = "zestimate " + lx::format_percent(report.zestimate_error);
  for (const auto& row : report.rows) out += ", " + std::string(lx::to_string(row.mode)) + " " + lx::format_percent(row.median_error);
  return out;
}

Outcome ablation_ordering() {
  const auto report = lx::run_ablation(default_world(), kModes, lx::PipelineConfig{}, kSeeds);
  const auto& full = report.row(lx::RepresentationMode::kFull).per_seed;
  const auto& meta = report.row(lx::RepresentationMode::kMetadataOnly).per_seed;
  const auto& no_room = report.row(lx::RepresentationMode::kNoRoomClassifier).per_seed;
  const auto& direct = report.row(lx::RepresentationMode::kDirectRegression).per_seed;
  int full_wins = 0, meta_worst = 0;
  for (std::size_t s = 0; s < kSeeds.size(); ++s) {
    full_wins += full[s] < meta[s] ? 1 : 0;
    meta_worst += (meta[s] > full[s] && meta[s] > no_room[s] && meta[s] > direct[s]) ? 1 : 0;
  }
  return {full_wins >= 4 && meta_worst >= 4, "full < metadata_only in " + std::to_string(full_wins) +
                                                 "/5 seeds, metadata_only worst in " + std::to_string(meta_worst) +
                                                 "/5; medians: " + per_seed_summary(report)};
}

Outcome null_signal() {
  lx::WorldConfig config;
  config.luxury_price_weight = 0.0;
  const auto world = lx::generate_world(config);
  const std::vector<lx::RepresentationMode> modes{lx::RepresentationMode::kFull, lx::RepresentationMode::kMetadataOnly};
  const auto report = lx::run_ablation(world, modes, lx::PipelineConfig{}, kSeeds);
  const double gap = std::abs(report.row(lx::RepresentationMode::kFull).median_error -
                              report.row(lx::RepresentationMode::kMetadataOnly).median_error);
  return {gap < 0.01, "|full - metadata_only| = " + fmt("%.4f", gap) + "; " + per_seed_summary(report)};
}

// ---------------------------------------------------------------------------
// 8. Crowd protocol invariants

Outcome crowd_invariants() {
  const auto& world = default_world();
  const auto strata = lx::build_strata(world);
  std::size_t bad = 0, total = 0;
  std::vector<lx::GridTask> tasks;
  for (std::size_t r = 0; r < lx::kRoomCount; ++r) {
    const std::size_t count = 1000 / lx::kRoomCount + (r < 1000 % lx::kRoomCount ? 1 : 0);
    auto room_tasks = lx::make_grid_tasks(strata, lx::kAllRooms[r], count, 808);
    tasks.insert(tasks.end(), room_tasks.begin(), room_tasks.end());
  }
  for (const auto& t : tasks) {
    ++total;
    std::map<lx::PhotoSource, int> sources;
    std::set<std::string> distinct{t.probe};
    ++sources[world.photo(t.probe).source];
    for (const auto& g : t.gallery) {
      ++sources[world.photo(g).source];
      distinct.insert(g);
    }
    const bool ok = distinct.size() == 10 && sources[lx::PhotoSource::kZillow] == 2 &&
                    sources[lx::PhotoSource::kHouzz] == 4 && sources[lx::PhotoSource::kPlaces] == 2 &&
                    sources[lx::PhotoSource::kGoogle] == 2;
    bad += ok ? 0 : 1;
  }
  std::size_t count_mismatch = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    const auto& task = tasks[i];
    const auto r = lx::simulate_grid_response(task, world, lx::AnnotatorModel{}, lx::derive_seed(809, i));
    const std::size_t s = r.selected.size();
    count_mismatch += lx::extract_triplets(task, r).size() == s * (9 - s) ? 0 : 1;
  }
  return {total == 1000 && bad == 0 && count_mismatch == 0,
          std::to_string(total) + " tasks, " + std::to_string(bad) + " with bad composition, " +
              std::to_string(count_mismatch) + " triplet-count mismatches"};
}

// ---------------------------------------------------------------------------
// 9. Zero-noise anchor recovery

Outcome zero_noise_recovery() {
  const auto& world = default_world();
  lx::AnchorSet anchors;
  anchors.room = lx::RoomCategory::kLivingRoom;
  std::size_t k = 0;
  std::vector<std::string> probes;
  for (const auto& [id, p] : world.photos) {
    if (p.source == lx::PhotoSource::kHouzz && p.room_true == anchors.room && k < 8) {
      anchors.anchors[k++] = id;
    } else if (p.source == lx::PhotoSource::kZillow && probes.size() < 500) {
      probes.push_back(id);
    }
  }
  lx::TaskSet tasks;
  tasks.anchor = lx::make_anchor_tasks(probes, anchors, 909);
  lx::SimulatedCrowd crowd;
  crowd.model = lx::AnnotatorModel{1.0, 0.0, 0.0, 1.0};
  crowd.seed = 9;
  const auto exported = lx::export_annotations(tasks, lx::simulate_campaign(tasks, world, crowd));
  std::size_t correct = 0;
  for (const auto& label : exported.labels) {
    const double latent = *world.photo(label.photo_id).latent_luxury;
    const int want = static_cast<int>(std::clamp(std::nearbyint(latent), 1.0, 8.0));
    correct += label.level.value() == want && label.responses == 3 ? 1 : 0;
  }
  return {exported.labels.size() == 500 && correct == 500,
          std::to_string(correct) + "/" + std::to_string(exported.labels.size()) + " photos recovered"};
}

// ---------------------------------------------------------------------------
// 10. Service durability and equivalence

std::string export_bytes(const fs::path& dir) {
  const auto p = lx::export_paths(dir);
  return lx::read_text_file(p.triplets) + lx::read_text_file(p.labels) + lx::read_text_file(p.workers);
}

int wait_for_port(const fs::path& port_file) {
  for (int i = 0; i < 600; ++i) {
    if (fs::exists(port_file)) return std::stoi(lx::read_text_file(port_file));
    std::this_thread::sleep_for(std::chrono::milliseconds(25));
  }
  throw lx::IoError("service did not report a port");
}

Outcome service_durability() {
  TempDir dir;
  auto config = testing_support::small_world_config(10);
  config.n_houses = 150;
  const auto world = lx::generate_world(config);
  lx::save_dataset_dir(world, dir / "data");
  const auto strata = lx::build_strata(world);
  lx::TaskSet tasks;
  tasks.grid = lx::make_grid_tasks(strata, lx::RoomCategory::kKitchen, 20, 4, 0.2, &world);
  lx::AnchorSet anchors;
  anchors.room = lx::RoomCategory::kKitchen;
  std::size_t k = 0;
  std::vector<std::string> probes, pool;
  for (const auto& [id, p] : world.photos) {
    if (p.room_true != lx::RoomCategory::kKitchen) continue;
    if (p.source == lx::PhotoSource::kHouzz && k < 8) {
      anchors.anchors[k++] = id;
    } else if (p.source == lx::PhotoSource::kZillow) {
      (probes.size() < 15 ? probes : pool).push_back(id);
    }
  }
  pool.insert(pool.end(), probes.begin(), probes.end());
  tasks.anchor = lx::make_anchor_tasks(probes, anchors, 4, 0.2, &world, pool);
  lx::save_tasks(dir / "tasks.jsonl", tasks);

  lx::SimulatedCrowd crowd;
  crowd.seed = 12;
  std::map<std::string, const lx::GridTask*> grid_by_id;
  for (const auto& t : tasks.grid) grid_by_id.emplace(t.id, &t);
  std::map<std::string, const lx::AnchorTask*> anchor_by_id;
  for (const auto& t : tasks.anchor) anchor_by_id.emplace(t.id, &t);

  const auto start = [&] {
    fs::remove(dir / "port");
    const auto pid = spawn_cli({"serve", "--data", (dir / "data").string(), "--tasks", (dir / "tasks.jsonl").string(),
                                "--log", (dir / "log.jsonl").string(), "--port", "0", "--port-file",
                                (dir / "port").string(), "--catch-fraction", "0.3", "--seed", "5"},
                               dir / "serve.out");
    return std::pair(pid, wait_for_port(dir / "port"));
  };

  std::set<std::pair<std::string, std::string>> acked;
  auto [pid, port] = start();
  bool protocol_ok = true;
  const auto drive = [&](int port_now, std::size_t stop_after) {
    httplib::Client client("127.0.0.1", port_now);
    for (const auto& worker : crowd.workers) {
      for (const std::string kind : {"grid", "anchor"}) {
        while (true) {
          if (acked.size() >= stop_after) {
            // Leave one assignment open, then stop.
            client.Get("/api/task?worker=" + worker + "&kind=" + kind);
            return false;
          }
          const auto res = client.Get("/api/task?worker=" + worker + "&kind=" + kind);
          if (!res || res->status != 200) {
            protocol_ok = false;
            return true;
          }
          const auto task = lx::Json::parse(res->body);
          if (task.contains("empty")) break;
          const auto id = task.at("id").get<std::string>();
          lx::Json body;
          if (kind == "grid") {
            const auto r = lx::simulate_answer(crowd, *grid_by_id.at(id), worker, world);
            body = {{"kind", "grid"}, {"task_id", id}, {"worker_id", worker}, {"selected", r.selected}};
          } else {
            const auto r = lx::simulate_answer(crowd, *anchor_by_id.at(id), worker, world);
            body = {{"kind", "anchor"}, {"task_id", id}, {"worker_id", worker}, {"level", r.level.value()}};
          }
          const auto ack = client.Post("/api/response", lx::dump_line(body), "application/json");
          if (!ack || ack->status != 200) {
            protocol_ok = false;
            return true;
          }
          acked.emplace(id, worker);
        }
      }
    }
    return true;
  };

  drive(port, 60);
  ::kill(pid, SIGKILL);
  wait_for(pid);
  const std::size_t before_kill = acked.size();

  const auto log = lx::read_log(dir / "log.jsonl");
  std::set<std::pair<std::string, std::string>> logged;
  for (const auto& rec : log.records) {
    const auto type = rec.at("type").get<std::string>();
    if (type == "grid_response" || type == "anchor_response") {
      logged.emplace(rec.at("response").at("task_id").get<std::string>(),
                     rec.at("response").at("worker_id").get<std::string>());
    }
  }
  const bool survived = std::includes(logged.begin(), logged.end(), acked.begin(), acked.end());

  std::tie(pid, port) = start();
  httplib::Client probe("127.0.0.1", port);
  const auto progress = probe.Get("/api/progress");
  const bool replayed = progress && lx::Json::parse(progress->body).at("responses").get<std::size_t>() == acked.size();
  drive(port, std::numeric_limits<std::size_t>::max());
  ::kill(pid, SIGTERM);
  const int serve_exit = wait_for(pid);

  run_cli({"export", "--log", (dir / "log.jsonl").string(), "--out", (dir / "served").string()}, dir / "export.out");
  lx::write_export(lx::export_annotations(tasks, lx::simulate_campaign(tasks, world, crowd)), dir / "direct");
  const bool identical = export_bytes(dir / "served") == export_bytes(dir / "direct");
  const std::size_t expected = (tasks.grid.size() + tasks.anchor.size()) * crowd.workers.size();

  return {survived && replayed && protocol_ok && identical && acked.size() == expected && serve_exit == 0,
          std::to_string(before_kill) + " acks before SIGKILL all " + (survived ? "survived" : "NOT all survived") +
              ", replay " + (replayed ? "matched" : "MISMATCHED") + ", " + std::to_string(acked.size()) + "/" +
              std::to_string(expected) + " responses, export " + (identical ? "byte-identical" : "DIFFERS")};
}

// ---------------------------------------------------------------------------
// 11. Determinism sweep

std::map<std::string, std::string> pipeline_outputs(const fs::path& root) {
  const auto out = root / "cli.out";
  const std::vector<std::string> env{"SOURCE_DATE_EPOCH=1700000000"};
  auto world = testing_support::small_world_config(77);
  world.n_houses = 400;
  lx::write_text_file(root / "world.json", lx::to_json(world).dump(2) + "\n");
  auto pipeline = testing_support::small_pipeline_config();
  pipeline.tune = true;
  pipeline.tune_max_samples = 120;
  pipeline.folds = 3;
  lx::write_text_file(root / "pipeline.json", lx::to_json(pipeline).dump(2) + "\n");
  const auto p = [&](const char* name) { return (root / name).string(); };

  run_cli({"synth", "--config", p("world.json"), "--out", p("data")}, out, env);
  run_cli({"train-room", "--data", p("data"), "--seed", "3", "--out", p("room.jsonl")}, out, env);
  run_cli({"tasks", "grid", "--data", p("data"), "--room", "kitchen", "--count", "40", "--seed", "3",
           "--catch-fraction", "0.1", "--out", p("grid-tasks.jsonl")},
          out, env);
  run_cli({"simulate", "--data", p("data"), "--tasks", p("grid-tasks.jsonl"), "--seed", "3", "--out", p("grid-sim")},
          out, env);
  run_cli({"embed", "--triplets", p("grid-sim/triplets.jsonl"), "--data", p("data"), "--iters", "300", "--seed", "3",
           "--out", p("embedding.jsonl"), "--anchors-out", p("anchors.jsonl")},
          out, env);
  run_cli({"tasks", "anchor", "--data", p("data"), "--room", "kitchen", "--anchors", p("anchors.jsonl"), "--count",
           "60", "--seed", "3", "--catch-fraction", "0.1", "--out", p("anchor-tasks.jsonl")},
          out, env);
  run_cli({"simulate", "--data", p("data"), "--tasks", p("anchor-tasks.jsonl"), "--seed", "3", "--out",
           p("anchor-sim")},
          out, env);
  run_cli({"train-luxury", "--data", p("data"), "--labels", p("anchor-sim/anchor_labels.jsonl"), "--per-room",
           "--seed", "3", "--out", p("luxury.jsonl")},
          out, env);
  run_cli({"train-valuation", "--data", p("data"), "--mode", "full", "--room-model", p("room.jsonl"),
           "--luxury-model", p("luxury.jsonl"), "--tune", "--folds", "3", "--tune-max-samples", "100", "--seed", "3",
           "--out", p("valuation-full.jsonl")},
          out, env);
  run_cli({"train-valuation", "--data", p("data"), "--mode", "metadata_only", "--seed", "3", "--out",
           p("valuation-meta.jsonl")},
          out, env);
  run_cli({"evaluate", "--data", p("data"), "--config", p("pipeline.json"), "--seeds", "1", "--out", p("report.txt")},
          out, env);

  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().filename() == "cli.out") continue;
    files.emplace(fs::relative(entry.path(), root).string(), lx::read_text_file(entry.path()));
  }
  return files;
}

Outcome determinism() {
  TempDir a, b;
  const auto first = pipeline_outputs(a.path());
  const auto second = pipeline_outputs(b.path());
  std::vector<std::string> differing;
  for (const auto& [name, bytes] : first) {
    const auto it = second.find(name);
    if (it == second.end() || it->second != bytes) differing.push_back(name);
  }
  std::string detail = std::to_string(first.size()) + " output files compared";
  for (const auto& d : differing) detail += ", differs: " + d;
  return {differing.empty() && first.size() == second.size() && first.size() >= 15, detail};
}

struct Criterion {
  int number;
  const char* name;
  double budget_seconds;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "t-STE gradient check", 5, tste_gradient},
      {2, "t-STE planted recovery", 10, tste_recovery},
      {3, "SVR oracle equivalence", 10, svr_equivalence},
      {4, "softmax gradient check", 2, softmax_gradient},
      {5, "room classifier accuracy", 30, room_accuracy},
      {6, "ablation ordering", 300, ablation_ordering},
      {7, "null-signal control", 300, null_signal},
      {8, "crowd-protocol invariants", 5, crowd_invariants},
      {9, "zero-noise annotation recovery", 5, zero_noise_recovery},
      {10, "service durability and equivalence", 30, service_durability},
      {11, "determinism sweep", 120, determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  bool all_pass = true;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.contains(c.number)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = seconds < c.budget_seconds;
    const bool pass = outcome.pass && in_time;
    all_pass = all_pass && pass;
    std::printf("%s %2d %s: %s [%.1f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", c.number, c.name,
                outcome.detail.c_str(), seconds, c.budget_seconds, in_time ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
