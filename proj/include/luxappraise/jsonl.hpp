#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "luxappraise/error.hpp"

namespace luxappraise {

using Json = nlohmann::ordered_json;

/// Calls `on_record(record, line_number)` for each non-blank line of a
/// line-delimited file. Parse failures and exceptions thrown by the callback
/// are rethrown as ParseError naming the file and 1-based line number.
inline void read_jsonl(const std::filesystem::path& path,
                       const std::function<void(const Json&, std::size_t)>& on_record) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_number) + ": malformed record: " + e.what());
    }
    try {
      on_record(record, line_number);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_number) + ": " + e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_number) + ": " + e.what());
    }
  }
}

inline std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::vector<Json> records;
  read_jsonl(path, [&](const Json& r, std::size_t) { records.push_back(r); });
  return records;
}

/// Compact single-line encoding; deterministic given key insertion order.
inline std::string dump_line(const Json& record) { return record.dump(-1, ' ', false, Json::error_handler_t::strict); }

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records) {
  std::ostringstream text;
  for (const auto& r : records) text << dump_line(r) << '\n';
  write_text_file(path, text.str());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace luxappraise
