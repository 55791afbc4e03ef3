// Command-line driver: world synthesis, crowd tasks, embedding, training,
// evaluation and the annotation service.

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "luxappraise/http_service.hpp"
#include "luxappraise/luxappraise.hpp"

namespace lx = luxappraise;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

lx::Json read_json_file(const fs::path& path) {
  try {
    return lx::Json::parse(lx::read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw lx::ParseError(path.string() + ": " + e.what());
  }
}

lx::RoomLookup rooms_for(const lx::Dataset& dataset, const std::string& room_model_path) {
  if (!room_model_path.empty()) {
    const auto models = lx::load_models(room_model_path);
    if (!models.contains("room")) throw lx::ValidationError(room_model_path + " holds no 'room' model");
    return lx::predict_rooms(models.at("room"), dataset);
  }
  lx::RoomLookup rooms;
  for (const auto& [id, photo] : dataset.photos) {
    if (photo.room_true) rooms.emplace(id, *photo.room_true);
  }
  return rooms;
}

lx::LuxuryModels luxury_bundle(const std::map<std::string, lx::SoftmaxModel>& models) {
  lx::LuxuryModels bundle;
  bool has_global = false;
  for (const auto& [name, model] : models) {
    if (name == "global") {
      bundle.global = model;
      has_global = true;
    } else {
      bundle.per_room.emplace(lx::parse_room(name), model);
    }
  }
  if (!has_global) throw lx::ValidationError("luxury model file has no 'global' model");
  return bundle;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string config;
  std::string out;
  std::string photos;
  std::string houses;
  std::optional<std::uint64_t> seed;
};

void run_synth(const SynthArgs& a) {
  lx::WorldConfig config;
  if (!a.config.empty()) config = lx::world_config_from_json(read_json_file(a.config));
  if (a.seed) config.seed = *a.seed;
  const auto dataset = lx::generate_world(config);
  if (!a.out.empty()) fs::create_directories(a.out);
  const fs::path photos = a.photos.empty() ? lx::photos_file(a.out) : fs::path(a.photos);
  const fs::path houses = a.houses.empty() ? lx::houses_file(a.out) : fs::path(a.houses);
  lx::save_dataset(dataset, photos, houses);
  std::cout << "wrote " << dataset.photos.size() << " photos and " << dataset.houses.size() << " houses\n";
}

struct TasksArgs {
  std::string data;
  std::string room;
  std::size_t count = 100;
  std::uint64_t seed = 1;
  double catch_fraction = 0.0;
  std::string anchors;
  std::string room_model;
  std::string out;
};

// Tasks only draw on the training view, so labels never touch test houses.
void run_tasks_grid(const TasksArgs& a) {
  const auto dataset = lx::training_view(lx::load_dataset_dir(a.data));
  const auto room = lx::parse_room(a.room);
  const auto rooms = rooms_for(dataset, a.room_model);
  const auto strata = lx::build_strata(dataset, &rooms);
  lx::TaskSet set;
  set.grid = lx::make_grid_tasks(strata, room, a.count, a.seed, a.catch_fraction, &dataset);
  lx::save_tasks(a.out, set);
  std::cout << "wrote " << set.grid.size() << " grid tasks\n";
}

void run_tasks_anchor(const TasksArgs& a) {
  const auto dataset = lx::training_view(lx::load_dataset_dir(a.data));
  const auto room = lx::parse_room(a.room);
  const auto sets = lx::load_anchor_sets(a.anchors);
  const auto it = sets.find(room);
  if (it == sets.end()) throw lx::NotFoundError(a.anchors + " has no anchors for " + a.room);
  const auto rooms = rooms_for(dataset, a.room_model);
  std::vector<std::string> pool;
  for (const auto& [id, r] : rooms) {
    if (r == room && !it->second.contains(id)) pool.push_back(id);
  }
  lx::Rng rng(lx::derive_seed(a.seed, "probe-sample", lx::to_string(room)));
  rng.shuffle(pool);
  std::vector<std::string> catch_pool = pool;
  if (pool.size() > a.count) pool.resize(a.count);
  std::sort(pool.begin(), pool.end());
  std::sort(catch_pool.begin(), catch_pool.end());
  lx::TaskSet set;
  set.anchor = lx::make_anchor_tasks(pool, it->second, a.seed, a.catch_fraction, &dataset, catch_pool);
  lx::save_tasks(a.out, set);
  std::cout << "wrote " << set.anchor.size() << " anchor tasks\n";
}

struct SimulateArgs {
  std::string data;
  std::string tasks;
  std::string annotator;
  std::size_t workers = 3;
  std::uint64_t seed = 1;
  std::string out;
};

void run_simulate(const SimulateArgs& a) {
  const auto dataset = lx::load_dataset_dir(a.data);
  const auto tasks = lx::load_tasks(a.tasks);
  lx::SimulatedCrowd crowd;
  if (!a.annotator.empty()) crowd.model = lx::annotator_model_from_json(read_json_file(a.annotator));
  crowd.seed = a.seed;
  crowd.workers.clear();
  for (std::size_t w = 0; w < a.workers; ++w) crowd.workers.push_back("sim-" + std::to_string(w + 1));
  const auto batch = lx::simulate_campaign(tasks, dataset, crowd);
  fs::create_directories(a.out);
  std::vector<lx::Json> lines;
  for (const auto& r : batch.grid) {
    lx::Json j = {{"kind", "grid"}};
    const auto fields = lx::to_json(r);
    for (const auto& [k, v] : fields.items()) j[k] = v;
    lines.push_back(std::move(j));
  }
  for (const auto& r : batch.anchor) {
    lx::Json j = {{"kind", "anchor"}};
    const auto fields = lx::to_json(r);
    for (const auto& [k, v] : fields.items()) j[k] = v;
    lines.push_back(std::move(j));
  }
  lx::write_jsonl(fs::path(a.out) / "responses.jsonl", lines);
  const auto exported = lx::export_annotations(tasks, batch);
  lx::write_export(exported, a.out);
  std::cout << "wrote " << lines.size() << " responses, " << exported.triplets.size() << " triplets, "
            << exported.labels.size() << " anchor labels\n";
}

struct EmbedArgs {
  std::string triplets;
  std::size_t dim = 2;
  double alpha = 1.0;
  std::uint64_t seed = 1;
  std::size_t iters = 1000;
  std::string out;
  std::string data;
  std::string anchors_out;
};

void run_embed(const EmbedArgs& a) {
  std::map<lx::RoomCategory, std::vector<lx::Triplet>> by_room;
  for (const auto& t : lx::load_triplets(a.triplets)) by_room[t.room].push_back(t.triplet);
  if (by_room.empty()) throw lx::ValidationError(a.triplets + " holds no triplets");
  if (!a.anchors_out.empty() && a.data.empty()) throw lx::ValidationError("--anchors-out needs --data");
  std::optional<lx::Dataset> dataset;
  if (!a.data.empty()) dataset = lx::load_dataset_dir(a.data);

  std::vector<lx::Json> lines;
  std::map<lx::RoomCategory, lx::AnchorSet> anchors;
  for (const auto& [room, triplets] : by_room) {
    const lx::TsteConfig config{a.iters, 1.0, lx::derive_seed(a.seed, "tste", lx::to_string(room))};
    const auto embedding = lx::fit_embedding(triplets, a.dim, a.alpha, config);
    auto room_lines = lx::embedding_lines(embedding, room);
    lines.insert(lines.end(), room_lines.begin(), room_lines.end());
    const double satisfaction =
        lx::triplet_satisfaction(embedding, lx::index_triplets(triplets).triplets);
    std::cout << lx::to_string(room) << ": " << embedding.photo_ids.size() << " photos, " << triplets.size()
              << " triplets, satisfaction " << satisfaction << "\n";
    if (!a.anchors_out.empty()) {
      const auto clusters =
          lx::kmeans(embedding.points, lx::LuxuryLevel::kCount, lx::derive_seed(a.seed, "kmeans", lx::to_string(room)));
      anchors.emplace(room, lx::select_anchors(embedding, clusters.assignments, clusters.centroids,
                                               lx::luxury_proxy(*dataset, embedding.photo_ids), room));
    }
  }
  lx::write_jsonl(a.out, lines);
  if (!a.anchors_out.empty()) lx::save_anchor_sets(a.anchors_out, anchors);
}

struct TrainArgs {
  std::string data;
  std::string labels;
  bool per_room = false;
  std::uint64_t seed = 1;
  std::size_t max_samples = 6000;
  std::string out;
};

void run_train_room(const TrainArgs& a) {
  const auto view = lx::training_view(lx::load_dataset_dir(a.data));
  lx::PipelineConfig config;
  config.room_train_max = a.max_samples;
  const auto model = lx::train_room_classifier(view, config, a.seed);
  lx::save_models(a.out, {{"room", model}});
  std::cout << "trained room classifier, final loss " << model.final_loss << "\n";
}

void run_train_luxury(const TrainArgs& a) {
  const auto view = lx::training_view(lx::load_dataset_dir(a.data));
  std::vector<lx::AnchorLabel> labels;
  for (auto& l : lx::load_anchor_labels(a.labels)) {
    if (!view.photos.contains(l.photo_id)) {
      throw lx::ValidationError("label for " + l.photo_id + " which is not a training photo");
    }
    labels.push_back(std::move(l));
  }
  if (labels.empty()) throw lx::ValidationError(a.labels + " holds no labels");
  const auto models = lx::train_luxury_models(view, labels, lx::PipelineConfig{}, a.seed);
  std::map<std::string, lx::SoftmaxModel> named = {{"global", models.global}};
  if (a.per_room) {
    for (const auto& [room, model] : models.per_room) named.emplace(std::string(lx::to_string(room)), model);
  }
  lx::save_models(a.out, named);
  std::cout << "trained " << named.size() << " luxury model(s) on " << labels.size() << " labels\n";
}

struct ValuationArgs {
  std::string data;
  std::string mode = "full";
  std::string room_model;
  std::string luxury_model;
  double C = 10.0;
  double epsilon = 0.1;
  double gamma = 0.1;
  bool tune = false;
  std::size_t folds = 5;
  std::size_t tune_max_samples = 600;
  std::uint64_t seed = 1;
  std::string out;
};

void run_train_valuation(const ValuationArgs& a) {
  const auto view = lx::training_view(lx::load_dataset_dir(a.data));
  const auto mode = lx::parse_mode(a.mode);
  lx::TrainedPipeline trained;
  lx::PhotoInference inference;
  if (mode == lx::RepresentationMode::kFull || mode == lx::RepresentationMode::kNoRoomClassifier) {
    if (a.room_model.empty() || a.luxury_model.empty()) {
      throw lx::ValidationError("mode " + a.mode + " needs --room-model and --luxury-model");
    }
    const auto rooms = lx::load_models(a.room_model);
    if (!rooms.contains("room")) throw lx::ValidationError(a.room_model + " holds no 'room' model");
    trained.room_model = rooms.at("room");
    trained.luxury = luxury_bundle(lx::load_models(a.luxury_model));
    inference = lx::infer_photos(view, trained.room_model, trained.luxury);
  }
  const auto houses = lx::houses_in(view, lx::Split::kTrain);
  if (houses.size() < 2) throw lx::ValidationError("need at least 2 training houses");
  std::vector<lx::MetadataVector> metadata;
  for (const auto* h : houses) metadata.push_back(h->metadata);
  const auto normalizer = lx::fit_normalizer(metadata);
  lx::PipelineConfig config;
  config.tune = a.tune;
  config.folds = a.folds;
  config.tune_max_samples = a.tune_max_samples;
  config.svr = {a.C, a.epsilon, a.gamma};
  const auto x = lx::representation_matrix(view, houses, mode, normalizer, inference);
  const auto model =
      lx::train_valuation(x, lx::purchase_prices(houses), mode, view.feature_dim, normalizer, config, a.seed);
  lx::save_valuation_model(a.out, model);
  std::cout << "trained " << a.mode << " valuation model: C=" << model.svr.params.C
            << " epsilon=" << model.svr.params.epsilon << " gamma=" << model.svr.params.gamma << ", "
            << model.svr.coefficients.size() << " support vectors\n";
}

struct EvaluateArgs {
  std::string data;
  std::string modes = "full,metadata_only,no_room_classifier,direct_regression";
  std::string seeds = "1,2,3,4,5";
  std::string config;
  std::string out;
};

void run_evaluate(const EvaluateArgs& a) {
  const auto dataset = lx::load_dataset_dir(a.data);
  std::vector<lx::RepresentationMode> modes;
  for (const auto& m : split_list(a.modes)) modes.push_back(lx::parse_mode(m));
  std::vector<std::uint64_t> seeds;
  for (const auto& s : split_list(a.seeds)) {
    try {
      seeds.push_back(std::stoull(s));
    } catch (const std::exception&) {
      throw lx::ValidationError("bad seed '" + s + "'");
    }
  }
  lx::PipelineConfig config;
  if (!a.config.empty()) config = lx::pipeline_config_from_json(read_json_file(a.config));
  const auto report = lx::run_ablation(dataset, modes, config, seeds);
  const auto records = lx::emit_report(report, a.out);
  std::cout << lx::report_table(report) << "records: " << records.string() << "\n";
}

struct ServeArgs {
  std::string data;
  std::string tasks;
  std::string log = "responses.log.jsonl";
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string assets;
  std::string static_dir;
  std::string anchors;
  double catch_fraction = 0.0;
  std::size_t responses_per_task = 3;
  std::uint64_t seed = 1;
  bool tutorial_levels = false;
  std::string port_file;
};

httplib::Server* g_server = nullptr;

extern "C" void stop_server(int) {
  if (g_server != nullptr) g_server->stop();
}

void run_serve(const ServeArgs& a) {
  fs::path log = a.log;
  if (const char* env = std::getenv("LUXAPPRAISE_LOG"); env != nullptr && *env != '\0') log = env;
  std::optional<lx::Dataset> dataset;
  if (!a.data.empty()) dataset = lx::load_dataset_dir(a.data);
  lx::TaskSet tasks;
  if (!a.tasks.empty()) tasks = lx::load_tasks(a.tasks);
  std::map<lx::RoomCategory, lx::AnchorSet> anchors;
  if (!a.anchors.empty()) anchors = lx::load_anchor_sets(a.anchors);
  lx::ServiceConfig config{a.responses_per_task, a.catch_fraction, a.seed};
  lx::AnnotationService service(log, tasks, config, std::move(anchors));

  lx::HttpOptions options;
  if (!a.assets.empty()) options.assets = a.assets;
  if (!a.static_dir.empty()) options.static_dir = a.static_dir;
  options.dataset = dataset ? &*dataset : nullptr;
  options.tutorial_levels = a.tutorial_levels;

  httplib::Server server;
  lx::mount_routes(server, service, options);
  int port = a.port;
  if (port == 0) {
    port = server.bind_to_any_port(a.host);
  } else if (!server.bind_to_port(a.host, port)) {
    port = -1;
  }
  if (port < 0) throw lx::IoError("cannot bind " + a.host + ":" + std::to_string(a.port));
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  const auto progress = service.progress();
  std::cout << "serving " << progress.tasks_total << " tasks (" << progress.responses
            << " responses replayed) on http://" << a.host << ":" << port << ", log " << log.string() << std::endl;
  if (!a.port_file.empty()) {
    const fs::path tmp = a.port_file + ".tmp";
    lx::write_text_file(tmp, std::to_string(port) + "\n");
    fs::rename(tmp, a.port_file);
  }
  server.listen_after_bind();
  g_server = nullptr;
}

struct ExportArgs {
  std::string log;
  std::string out;
};

void run_export(const ExportArgs& a) {
  const auto exported = lx::export_log(a.log);
  lx::write_export(exported, a.out);
  std::size_t flagged = 0;
  for (const auto& w : exported.workers) flagged += w.flagged ? 1 : 0;
  std::cout << "exported " << exported.triplets.size() << " triplets, " << exported.labels.size()
            << " anchor labels, " << exported.workers.size() << " workers (" << flagged << " flagged)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vision-augmented house valuation: synthetic worlds, crowd annotation, training and evaluation"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic world (photos.jsonl, houses.jsonl)");
  synth_cmd->add_option("--config", synth.config, "World config (JSON)")->check(CLI::ExistingFile);
  synth_cmd->add_option("--out", synth.out, "Output directory");
  synth_cmd->add_option("--photos", synth.photos, "Photos file (overrides --out)");
  synth_cmd->add_option("--houses", synth.houses, "Houses file (overrides --out)");
  synth_cmd->add_option("--seed", synth.seed, "Override the config seed");
  synth_cmd->callback([&] {
    if (synth.out.empty() && (synth.photos.empty() || synth.houses.empty())) {
      throw CLI::ValidationError("synth", "give --out or both --photos and --houses");
    }
    run_synth(synth);
  });

  TasksArgs tasks;
  auto* tasks_cmd = app.add_subcommand("tasks", "Generate crowd tasks");
  tasks_cmd->require_subcommand(1);
  const auto add_task_flags = [&](CLI::App* cmd) {
    cmd->add_option("--data", tasks.data, "Dataset directory")->required();
    cmd->add_option("--room", tasks.room, "Room category")->required();
    cmd->add_option("--count", tasks.count, "Number of regular tasks");
    cmd->add_option("--seed", tasks.seed, "Seed");
    cmd->add_option("--catch-fraction", tasks.catch_fraction, "Catch tasks per regular task");
    cmd->add_option("--room-model", tasks.room_model, "Room classifier; default uses room_true");
    cmd->add_option("--out", tasks.out, "Tasks file")->required();
  };
  auto* grid_cmd = tasks_cmd->add_subcommand("grid", "Grid similarity tasks");
  add_task_flags(grid_cmd);
  grid_cmd->callback([&] { run_tasks_grid(tasks); });
  auto* anchor_cmd = tasks_cmd->add_subcommand("anchor", "Anchor classification tasks");
  add_task_flags(anchor_cmd);
  anchor_cmd->add_option("--anchors", tasks.anchors, "Anchor sets file")->required();
  anchor_cmd->callback([&] { run_tasks_anchor(tasks); });

  SimulateArgs simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Answer tasks with simulated annotators and export");
  simulate_cmd->add_option("--data", simulate.data, "Dataset directory")->required();
  simulate_cmd->add_option("--tasks", simulate.tasks, "Tasks file")->required();
  simulate_cmd->add_option("--annotator", simulate.annotator, "Annotator model (JSON)");
  simulate_cmd->add_option("--workers", simulate.workers, "Simulated workers");
  simulate_cmd->add_option("--seed", simulate.seed, "Seed");
  simulate_cmd->add_option("--out", simulate.out, "Output directory")->required();
  simulate_cmd->callback([&] { run_simulate(simulate); });

  EmbedArgs embed;
  auto* embed_cmd = app.add_subcommand("embed", "t-STE embedding per room, optional anchors");
  embed_cmd->add_option("--triplets", embed.triplets, "Triplets file")->required();
  embed_cmd->add_option("--dim", embed.dim, "Embedding dimension");
  embed_cmd->add_option("--alpha", embed.alpha, "Student-t degrees of freedom");
  embed_cmd->add_option("--seed", embed.seed, "Seed");
  embed_cmd->add_option("--iters", embed.iters, "Maximum iterations");
  embed_cmd->add_option("--out", embed.out, "Embedding file")->required();
  embed_cmd->add_option("--data", embed.data, "Dataset directory (luxury proxy for anchor ordering)");
  embed_cmd->add_option("--anchors-out", embed.anchors_out, "Anchor sets file");
  embed_cmd->callback([&] { run_embed(embed); });

  TrainArgs train;
  auto* room_cmd = app.add_subcommand("train-room", "Train the room classifier");
  room_cmd->add_option("--data", train.data, "Dataset directory")->required();
  room_cmd->add_option("--seed", train.seed, "Seed");
  room_cmd->add_option("--max-samples", train.max_samples, "Cap on training photos");
  room_cmd->add_option("--out", train.out, "Model file")->required();
  room_cmd->callback([&] { run_train_room(train); });

  auto* luxury_cmd = app.add_subcommand("train-luxury", "Train luxury-level classifiers");
  luxury_cmd->add_option("--data", train.data, "Dataset directory")->required();
  luxury_cmd->add_option("--labels", train.labels, "Anchor labels file")->required();
  luxury_cmd->add_flag("--per-room", train.per_room, "Also train one model per room");
  luxury_cmd->add_option("--seed", train.seed, "Seed");
  luxury_cmd->add_option("--out", train.out, "Model file")->required();
  luxury_cmd->callback([&] { run_train_luxury(train); });

  ValuationArgs valuation;
  auto* valuation_cmd = app.add_subcommand("train-valuation", "Fit the SVR price model for one mode");
  valuation_cmd->add_option("--data", valuation.data, "Dataset directory")->required();
  valuation_cmd->add_option("--mode", valuation.mode, "full | metadata_only | no_room_classifier | direct_regression");
  valuation_cmd->add_option("--room-model", valuation.room_model, "Room classifier file");
  valuation_cmd->add_option("--luxury-model", valuation.luxury_model, "Luxury classifier file");
  valuation_cmd->add_option("--C", valuation.C, "Box constraint");
  valuation_cmd->add_option("--epsilon", valuation.epsilon, "Tube width (standardized units)");
  valuation_cmd->add_option("--gamma", valuation.gamma, "RBF width");
  valuation_cmd->add_flag("--tune", valuation.tune, "Select C, epsilon, gamma by cross-validation");
  valuation_cmd->add_option("--folds", valuation.folds, "Cross-validation folds");
  valuation_cmd->add_option("--tune-max-samples", valuation.tune_max_samples, "Cap on tuning houses");
  valuation_cmd->add_option("--seed", valuation.seed, "Seed");
  valuation_cmd->add_option("--out", valuation.out, "Model file")->required();
  valuation_cmd->callback([&] { run_train_valuation(valuation); });

  EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Run the ablation and write the report");
  evaluate_cmd->add_option("--data", evaluate.data, "Dataset directory")->required();
  evaluate_cmd->add_option("--modes", evaluate.modes, "Comma-separated modes");
  evaluate_cmd->add_option("--seeds", evaluate.seeds, "Comma-separated seeds");
  evaluate_cmd->add_option("--config", evaluate.config, "Pipeline config (JSON)");
  evaluate_cmd->add_option("--out", evaluate.out, "Report table path; records go next to it as .jsonl")->required();
  evaluate_cmd->callback([&] { run_evaluate(evaluate); });

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the annotation service");
  serve_cmd->add_option("--data", serve.data, "Dataset directory (placeholder cards)");
  serve_cmd->add_option("--tasks", serve.tasks, "Tasks file to register");
  serve_cmd->add_option("--log", serve.log, "Response log (LUXAPPRAISE_LOG overrides)");
  serve_cmd->add_option("--port", serve.port, "Port (0 picks a free one)");
  serve_cmd->add_option("--host", serve.host, "Bind address");
  serve_cmd->add_option("--assets", serve.assets, "Photo asset directory");
  serve_cmd->add_option("--static", serve.static_dir, "Directory served at /");
  serve_cmd->add_option("--anchors", serve.anchors, "Anchor sets file");
  serve_cmd->add_option("--catch-fraction", serve.catch_fraction, "Probability of serving a catch task");
  serve_cmd->add_option("--responses-per-task", serve.responses_per_task, "Responses needed to retire a task");
  serve_cmd->add_option("--seed", serve.seed, "Seed for catch insertion");
  serve_cmd->add_flag("--tutorial-levels", serve.tutorial_levels, "Show latent levels on placeholder cards");
  serve_cmd->add_option("--port-file", serve.port_file, "Write the bound port here");
  serve_cmd->callback([&] { run_serve(serve); });

  ExportArgs exp;
  auto* export_cmd = app.add_subcommand("export", "Export triplets, anchor labels and worker report from a log");
  export_cmd->add_option("--log", exp.log, "Response log")->required();
  export_cmd->add_option("--out", exp.out, "Output directory")->required();
  export_cmd->callback([&] { run_export(exp); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
