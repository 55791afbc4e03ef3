#pragma once

// Task queue over an append-only response log. Every state change (task
// registration, assignment, response) is a log record with a strictly
// increasing sequence number, written and fsynced before it is acknowledged;
// the in-memory state is a fold over the log.

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "luxappraise/anchor_set.hpp"
#include "luxappraise/campaign.hpp"
#include "luxappraise/crowd_tasks.hpp"
#include "luxappraise/error.hpp"
#include "luxappraise/jsonl.hpp"
#include "luxappraise/rng.hpp"

namespace luxappraise {

enum class TaskKind { kGrid, kAnchor };

inline std::string_view to_string(TaskKind kind) { return kind == TaskKind::kGrid ? "grid" : "anchor"; }

inline TaskKind parse_task_kind(std::string_view name) {
  if (name == "grid") return TaskKind::kGrid;
  if (name == "anchor") return TaskKind::kAnchor;
  throw ProtocolError("unknown task kind '" + std::string(name) + "' (expected grid or anchor)");
}

// ---------------------------------------------------------------------------
// Log file

struct LogContents {
  std::vector<Json> records;
  /// Bytes of complete, valid records; anything past this is a torn tail.
  std::uintmax_t valid_bytes = 0;
};

/// Reads a log. A final line without a newline is a write that was never
/// acknowledged and is ignored; any other malformed or out-of-order record is
/// an error naming the sequence number expected there.
inline LogContents read_log(const std::filesystem::path& path) {
  LogContents out;
  if (!std::filesystem::exists(path)) return out;
  const std::string text = read_text_file(path);
  std::size_t pos = 0;
  std::uint64_t expected = 1;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) break;
    const std::string line = text.substr(pos, end - pos);
    Json record;
    try {
      record = Json::parse(line);
      if (record.at("seq").get<std::uint64_t>() != expected) throw ParseError("sequence gap");
      record.at("type").get<std::string>();
    } catch (const std::exception& e) {
      throw ParseError(path.string() + ": corrupt log record at seq " + std::to_string(expected) + ": " + e.what());
    }
    out.records.push_back(std::move(record));
    ++expected;
    pos = end + 1;
    out.valid_bytes = pos;
  }
  return out;
}

/// Single appender; callers serialize access.
class LogWriter {
 public:
  LogWriter(const std::filesystem::path& path, std::uintmax_t valid_bytes, std::uint64_t last_seq)
      : path_(path), last_seq_(last_seq) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open log '" + path.string() + "': " + std::strerror(errno));
    if (::ftruncate(fd_, static_cast<off_t>(valid_bytes)) != 0) {
      ::close(fd_);
      throw IoError("cannot truncate torn tail of '" + path.string() + "'");
    }
  }
  LogWriter(const LogWriter&) = delete;
  LogWriter& operator=(const LogWriter&) = delete;
  ~LogWriter() {
    if (fd_ >= 0) ::close(fd_);
  }

  std::uint64_t last_seq() const { return last_seq_; }

  /// Stamps `record` with the next sequence number, writes and fsyncs it.
  std::uint64_t append(Json record) {
    Json line;
    line["seq"] = last_seq_ + 1;
    for (auto& [k, v] : record.items()) line[k] = std::move(v);
    const std::string text = dump_line(line) + '\n';
    std::size_t written = 0;
    while (written < text.size()) {
      const ssize_t n = ::write(fd_, text.data() + written, text.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw IoError("write to '" + path_.string() + "' failed: " + std::strerror(errno));
      }
      written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw IoError("fsync of '" + path_.string() + "' failed");
    return ++last_seq_;
  }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::uint64_t last_seq_ = 0;
};

// ---------------------------------------------------------------------------
// Queue state

struct ServiceConfig {
  std::size_t responses_per_task = 3;
  /// Probability of serving a catch trial when a regular task is also available.
  double catch_fraction = 0.0;
  std::uint64_t seed = 0;
};

struct Progress {
  std::size_t tasks_total = 0;
  std::size_t retired = 0;
  std::size_t responses = 0;
  std::size_t workers = 0;
  std::size_t catch_tasks = 0;
};

inline Json to_json(const Progress& p) {
  return {{"tasks_total", p.tasks_total},
          {"retired", p.retired},
          {"responses", p.responses},
          {"workers", p.workers},
          {"catch_tasks", p.catch_tasks}};
}

/// Task as shown to an annotator: catch flags and answer keys are withheld.
inline Json public_view(const GridTask& t) {
  Json j = to_json(t);
  j.erase("is_catch");
  j.erase("catch_expected");
  return j;
}

inline Json public_view(const AnchorTask& t) {
  Json j = to_json(t);
  j.erase("is_catch");
  j.erase("catch_expected");
  return j;
}

/// Replayable queue state. Not thread-safe; AnnotationService adds locking
/// and persistence.
class QueueState {
 public:
  explicit QueueState(std::size_t required = 3) : required_(required) {
    if (required == 0) throw ValidationError("responses per task must be >= 1");
  }

  /// Applies one log record; throws on records inconsistent with the state.
  void apply(const Json& record) {
    const auto type = record.at("type").get<std::string>();
    if (type == "task") {
      const auto& t = record.at("task");
      if (parse_task_kind(t.at("kind").get<std::string>()) == TaskKind::kGrid) {
        add_task(grid_task_from_json(t));
      } else {
        add_task(anchor_task_from_json(t));
      }
    } else if (type == "assign") {
      const auto task = record.at("task_id").get<std::string>();
      const auto worker = record.at("worker_id").get<std::string>();
      check_assignable(task, worker);
      entry(task).outstanding.insert(worker);
    } else if (type == "grid_response") {
      accept(grid_response_from_json(record.at("response")));
    } else if (type == "anchor_response") {
      accept(anchor_response_from_json(record.at("response")));
    } else {
      throw ParseError("unknown log record type '" + type + "'");
    }
  }

  bool has_task(const std::string& id) const { return entries_.contains(id); }

  /// Whether registering `task` would be a no-op (same content already
  /// present). Throws ConflictError on a different task with the same id.
  template <class Task>
  bool already_registered(const Task& task) const {
    const auto it = entries_.find(task.id);
    if (it == entries_.end()) return false;
    const Task* existing = nullptr;
    if constexpr (std::is_same_v<Task, GridTask>) {
      if (it->second.kind == TaskKind::kGrid) existing = &grid_.at(task.id);
    } else {
      if (it->second.kind == TaskKind::kAnchor) existing = &anchor_.at(task.id);
    }
    if (existing == nullptr || !(*existing == task)) {
      throw ConflictError("task " + task.id + " already exists with different content");
    }
    return true;
  }

  /// The worker's pending assignment of this kind/room, if any.
  std::optional<std::string> held_assignment(const std::string& worker, TaskKind kind,
                                             const std::optional<RoomCategory>& room) const {
    for (const auto& id : order_) {
      const auto& e = entries_.at(id);
      if (e.kind == kind && room_matches(id, room) && e.outstanding.contains(worker)) return id;
    }
    return std::nullopt;
  }

  /// First eligible regular and catch task for the worker, in registration order.
  std::pair<std::optional<std::string>, std::optional<std::string>> candidates(
      const std::string& worker, TaskKind kind, const std::optional<RoomCategory>& room) const {
    std::optional<std::string> regular;
    std::optional<std::string> catch_task;
    for (const auto& id : order_) {
      if (regular && catch_task) break;
      const auto& e = entries_.at(id);
      if (e.kind != kind || !room_matches(id, room) || e.answered.contains(worker) || e.outstanding.contains(worker)) {
        continue;
      }
      if (e.is_catch) {
        if (!catch_task) catch_task = id;
      } else if (!regular && counted(e) + e.outstanding.size() < required_) {
        regular = id;
      }
    }
    return {regular, catch_task};
  }

  Json served(const std::string& id) const {
    return entries_.at(id).kind == TaskKind::kGrid ? public_view(grid_.at(id)) : public_view(anchor_.at(id));
  }

  /// Checks a submission against the state without changing it.
  void check_submission(const std::string& task_id, const std::string& worker, TaskKind kind) const {
    const auto it = entries_.find(task_id);
    if (it == entries_.end()) throw NotFoundError("unknown task " + task_id);
    if (it->second.kind != kind) {
      throw ProtocolError("task " + task_id + " is a " + std::string(to_string(it->second.kind)) + " task");
    }
    if (it->second.answered.contains(worker)) {
      throw ConflictError("worker " + worker + " already answered task " + task_id);
    }
    if (!it->second.outstanding.contains(worker)) {
      throw ProtocolError("worker " + worker + " holds no assignment for task " + task_id);
    }
  }

  const GridTask& grid_task(const std::string& id) const { return grid_.at(id); }
  const AnchorTask& anchor_task(const std::string& id) const { return anchor_.at(id); }

  void check_assignable(const std::string& task, const std::string& worker) const {
    const auto it = entries_.find(task);
    if (it == entries_.end()) throw NotFoundError("assignment of unknown task " + task);
    if (it->second.answered.contains(worker) || it->second.outstanding.contains(worker)) {
      throw ConflictError("task " + task + " assigned to worker " + worker + " twice");
    }
  }

  Progress progress() const {
    Progress p;
    for (const auto& [id, e] : entries_) {
      if (e.is_catch) {
        ++p.catch_tasks;
        continue;
      }
      ++p.tasks_total;
      if (counted(e) >= required_) ++p.retired;
    }
    p.responses = batch_.grid.size() + batch_.anchor.size();
    p.workers = workers_.size();
    return p;
  }

  bool retired(const std::string& id) const {
    const auto& e = entries_.at(id);
    return !e.is_catch && counted(e) >= required_;
  }

  /// Tasks in registration order.
  TaskSet tasks() const {
    TaskSet set;
    for (const auto& id : order_) {
      if (entries_.at(id).kind == TaskKind::kGrid) {
        set.grid.push_back(grid_.at(id));
      } else {
        set.anchor.push_back(anchor_.at(id));
      }
    }
    return set;
  }

  const AnnotationBatch& responses() const { return batch_; }

  WorkerReport worker_report(const std::string& worker) const {
    const auto it = catch_results_.find(worker);
    if (it == catch_results_.end()) return score_worker(worker, {});
    return score_worker(worker, it->second);
  }

  /// Anchor ids of a room in level order, from the first anchor task of that room.
  std::optional<std::array<std::string, LuxuryLevel::kCount>> anchors_from_tasks(RoomCategory room) const {
    for (const auto& id : order_) {
      if (entries_.at(id).kind != TaskKind::kAnchor) continue;
      const auto& t = anchor_.at(id);
      if (t.room == room) return t.anchors;
    }
    return std::nullopt;
  }

  template <class Task>
  void add_task(Task task) {
    if (entries_.contains(task.id)) throw ConflictError("duplicate task id " + task.id);
    Entry e;
    e.is_catch = task.is_catch;
    e.room = task.room;
    if constexpr (std::is_same_v<Task, GridTask>) {
      e.kind = TaskKind::kGrid;
    } else {
      e.kind = TaskKind::kAnchor;
    }
    order_.push_back(task.id);
    entries_.emplace(task.id, std::move(e));
    if constexpr (std::is_same_v<Task, GridTask>) {
      grid_.emplace(task.id, std::move(task));
    } else {
      anchor_.emplace(task.id, std::move(task));
    }
  }

  void accept(const GridResponse& r) {
    check_submission(r.task_id, r.worker_id, TaskKind::kGrid);
    const auto& task = grid_.at(r.task_id);
    validate_response(task, r);
    record(r.task_id, r.worker_id);
    batch_.grid.push_back(r);
    if (task.is_catch) catch_results_[r.worker_id].emplace_back(std::pair(task, r));
  }

  void accept(const AnchorResponse& r) {
    check_submission(r.task_id, r.worker_id, TaskKind::kAnchor);
    const auto& task = anchor_.at(r.task_id);
    record(r.task_id, r.worker_id);
    batch_.anchor.push_back(r);
    if (task.is_catch) catch_results_[r.worker_id].emplace_back(std::pair(task, r));
  }

 private:
  struct Entry {
    TaskKind kind = TaskKind::kGrid;
    RoomCategory room = RoomCategory::kBathroom;
    bool is_catch = false;
    std::set<std::string> outstanding;
    /// Workers who answered, in answer order.
    std::vector<std::string> accepted;
    std::set<std::string> answered;
  };

  Entry& entry(const std::string& id) { return entries_.at(id); }

  bool room_matches(const std::string& id, const std::optional<RoomCategory>& room) const {
    return !room || entries_.at(id).room == *room;
  }

  /// Accepted responses from workers not currently flagged.
  std::size_t counted(const Entry& e) const {
    std::size_t n = 0;
    for (const auto& w : e.accepted) {
      if (!worker_report(w).flagged) ++n;
    }
    return n;
  }

  void record(const std::string& task, const std::string& worker) {
    auto& e = entry(task);
    e.outstanding.erase(worker);
    e.answered.insert(worker);
    e.accepted.push_back(worker);
    workers_.insert(worker);
  }

  std::size_t required_;
  std::vector<std::string> order_;
  std::map<std::string, Entry> entries_;
  std::map<std::string, GridTask> grid_;
  std::map<std::string, AnchorTask> anchor_;
  AnnotationBatch batch_;
  std::set<std::string> workers_;
  std::map<std::string, std::vector<CatchResult>> catch_results_;
};

inline Json task_record(const GridTask& t) { return {{"type", "task"}, {"task", to_json(t)}}; }
inline Json task_record(const AnchorTask& t) { return {{"type", "task"}, {"task", to_json(t)}}; }

// ---------------------------------------------------------------------------
// Service

class AnnotationService {
 public:
  /// Replays `log_path` (truncating a torn final line), then registers any
  /// tasks of `tasks` not yet in the log.
  AnnotationService(const std::filesystem::path& log_path, const TaskSet& tasks, ServiceConfig config = {},
                    std::map<RoomCategory, AnchorSet> anchors = {})
      : config_(config), state_(config.responses_per_task), anchors_(std::move(anchors)),
        rng_(derive_seed(config.seed, "catch-insertion")) {
    if (!(config.catch_fraction >= 0.0 && config.catch_fraction <= 1.0)) {
      throw ValidationError("catch fraction must be in [0,1]");
    }
    const auto contents = read_log(log_path);
    for (const auto& record : contents.records) {
      try {
        state_.apply(record);
      } catch (const std::exception& e) {
        throw ParseError(log_path.string() + ": inconsistent log record at seq " +
                         std::to_string(record.at("seq").get<std::uint64_t>()) + ": " + e.what());
      }
    }
    writer_.emplace(log_path, contents.valid_bytes, contents.records.size());
    for (const auto& t : tasks.grid) register_task(t);
    for (const auto& t : tasks.anchor) register_task(t);
  }

  /// A task for the worker, or nullopt when none remain. A worker holding an
  /// unanswered assignment gets that assignment back.
  std::optional<Json> next_task(const std::string& worker, TaskKind kind,
                                const std::optional<RoomCategory>& room = std::nullopt) {
    if (worker.empty()) throw ProtocolError("worker id is required");
    std::lock_guard lock(mutex_);
    if (auto held = state_.held_assignment(worker, kind, room)) return state_.served(*held);
    const auto [regular, catch_task] = state_.candidates(worker, kind, room);
    std::optional<std::string> pick;
    if (regular && catch_task) {
      pick = rng_.bernoulli(config_.catch_fraction) ? catch_task : regular;
    } else {
      pick = regular ? regular : catch_task;
    }
    if (!pick) return std::nullopt;
    Json rec = {{"type", "assign"}, {"task_id", *pick}, {"worker_id", worker}, {"time", now_ms()}};
    writer_->append(rec);
    state_.apply(rec);
    return state_.served(*pick);
  }

  std::uint64_t submit(GridResponse response) {
    std::lock_guard lock(mutex_);
    state_.check_submission(response.task_id, response.worker_id, TaskKind::kGrid);
    validate_response(state_.grid_task(response.task_id), response);
    if (response.timestamp == 0) response.timestamp = now_ms();
    const auto seq = writer_->append({{"type", "grid_response"}, {"response", to_json(response)}});
    state_.accept(response);
    return seq;
  }

  std::uint64_t submit(AnchorResponse response) {
    std::lock_guard lock(mutex_);
    state_.check_submission(response.task_id, response.worker_id, TaskKind::kAnchor);
    if (response.timestamp == 0) response.timestamp = now_ms();
    const auto seq = writer_->append({{"type", "anchor_response"}, {"response", to_json(response)}});
    state_.accept(response);
    return seq;
  }

  /// Body {kind, task_id, worker_id, selected | level}.
  std::uint64_t submit(const Json& body) {
    if (!body.is_object()) throw ProtocolError("response body must be an object");
    const auto kind = parse_task_kind(string_field(body, "kind"));
    const auto task_id = string_field(body, "task_id");
    const auto worker = string_field(body, "worker_id");
    if (kind == TaskKind::kGrid) {
      if (!body.contains("selected") || !body.at("selected").is_array()) {
        throw ProtocolError("grid response needs a 'selected' array");
      }
      GridResponse r;
      r.task_id = task_id;
      r.worker_id = worker;
      for (const auto& s : body.at("selected")) {
        if (!s.is_string()) throw ProtocolError("'selected' must hold photo ids");
        r.selected.push_back(s.get<std::string>());
      }
      return submit(std::move(r));
    }
    if (!body.contains("level") || !body.at("level").is_number_integer()) {
      throw ProtocolError("anchor response needs an integer 'level'");
    }
    {
      // Unknown task and duplicates take precedence over a bad level.
      std::lock_guard lock(mutex_);
      state_.check_submission(task_id, worker, TaskKind::kAnchor);
    }
    AnchorResponse r;
    r.task_id = task_id;
    r.worker_id = worker;
    r.level = LuxuryLevel(body.at("level").get<int>());
    return submit(std::move(r));
  }

  Progress progress() const {
    std::lock_guard lock(mutex_);
    return state_.progress();
  }

  std::array<std::string, LuxuryLevel::kCount> anchors(RoomCategory room) const {
    std::lock_guard lock(mutex_);
    if (const auto it = anchors_.find(room); it != anchors_.end()) return it->second.anchors;
    if (auto from_tasks = state_.anchors_from_tasks(room)) return *from_tasks;
    throw NotFoundError("no anchors for room " + std::string(to_string(room)));
  }

  WorkerReport worker_report(const std::string& worker) const {
    std::lock_guard lock(mutex_);
    return state_.worker_report(worker);
  }

  AnnotationExport export_now() const {
    std::lock_guard lock(mutex_);
    return export_annotations(state_.tasks(), state_.responses());
  }

  std::uint64_t last_seq() const {
    std::lock_guard lock(mutex_);
    return writer_->last_seq();
  }

 private:
  template <class Task>
  void register_task(const Task& task) {
    if (state_.already_registered(task)) return;
    auto rec = task_record(task);
    writer_->append(rec);
    state_.add_task(task);
  }

  static std::string string_field(const Json& body, const char* key) {
    if (!body.contains(key) || !body.at(key).is_string()) {
      throw ProtocolError(std::string("missing string field '") + key + "'");
    }
    return body.at(key).get<std::string>();
  }

  static std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }

  ServiceConfig config_;
  QueueState state_;
  std::map<RoomCategory, AnchorSet> anchors_;
  Rng rng_;
  std::optional<LogWriter> writer_;
  mutable std::mutex mutex_;
};

/// Replays a log without modifying it and exports its annotations.
inline AnnotationExport export_log(const std::filesystem::path& log_path) {
  if (!std::filesystem::exists(log_path)) throw IoError("log '" + log_path.string() + "' does not exist");
  const auto contents = read_log(log_path);
  QueueState state(std::numeric_limits<std::size_t>::max());
  for (const auto& record : contents.records) {
    try {
      state.apply(record);
    } catch (const std::exception& e) {
      throw ParseError(log_path.string() + ": inconsistent log record at seq " +
                       std::to_string(record.at("seq").get<std::uint64_t>()) + ": " + e.what());
    }
  }
  return export_annotations(state.tasks(), state.responses());
}

}  // namespace luxappraise
