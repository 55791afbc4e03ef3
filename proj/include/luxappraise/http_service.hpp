#pragma once

// HTTP routes of the annotation service. Bodies are single-line JSON.

#include <filesystem>
#include <optional>
#include <regex>
#include <string>

#include "httplib.h"
#include "luxappraise/annotation_service.hpp"
#include "luxappraise/records.hpp"
#include "luxappraise/synthetic_world.hpp"

namespace luxappraise {

struct HttpOptions {
  /// Directory of photo files named <id>.<ext>.
  std::optional<std::filesystem::path> assets;
  /// Directory served at "/" (the browser client).
  std::optional<std::filesystem::path> static_dir;
  /// Used for placeholder cards of photos without an asset file.
  const Dataset* dataset = nullptr;
  /// Placeholder cards show the latent level (tutorial rounds).
  bool tutorial_levels = false;
};

inline int http_status(const std::exception& e) {
  if (dynamic_cast<const NotFoundError*>(&e) != nullptr) return 404;
  if (dynamic_cast<const ConflictError*>(&e) != nullptr) return 409;
  if (dynamic_cast<const ProtocolError*>(&e) != nullptr || dynamic_cast<const ValidationError*>(&e) != nullptr ||
      dynamic_cast<const ParseError*>(&e) != nullptr) {
    return 400;
  }
  return 500;
}

inline void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(dump_line(body) + "\n", "application/json");
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Generated card for photos without an image file.
inline std::string placeholder_svg(const PhotoRecord& photo, bool show_level) {
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"240\" height=\"180\" viewBox=\"0 0 240 180\">"
      "<rect width=\"240\" height=\"180\" fill=\"#e8e4dc\"/>"
      "<text x=\"120\" y=\"80\" font-family=\"sans-serif\" font-size=\"18\" text-anchor=\"middle\">" +
      xml_escape(photo.id) + "</text>";
  if (photo.room_true) {
    svg += "<text x=\"120\" y=\"108\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" +
           std::string(to_string(*photo.room_true)) + "</text>";
  }
  if (show_level && photo.latent_luxury) {
    svg += "<text x=\"120\" y=\"136\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">level " +
           std::to_string(level_from_latent(*photo.latent_luxury).value()) + "</text>";
  }
  return svg + "</svg>";
}

inline std::optional<std::pair<std::filesystem::path, std::string>> find_asset(const std::filesystem::path& dir,
                                                                              const std::string& id) {
  static const std::pair<const char*, const char*> kTypes[] = {
      {".jpg", "image/jpeg"}, {".jpeg", "image/jpeg"}, {".png", "image/png"},
      {".webp", "image/webp"}, {".svg", "image/svg+xml"}};
  for (const auto& [ext, type] : kTypes) {
    auto path = dir / (id + ext);
    if (std::filesystem::is_regular_file(path)) return std::pair(path, std::string(type));
  }
  return std::nullopt;
}

template <class Handler>
void guarded(httplib::Response& res, Handler&& handler) {
  try {
    handler();
  } catch (const nlohmann::json::exception& e) {
    send_json(res, {{"error", std::string("malformed body: ") + e.what()}}, 400);
  } catch (const std::exception& e) {
    send_json(res, {{"error", e.what()}}, http_status(e));
  }
}

inline void mount_routes(httplib::Server& server, AnnotationService& service, const HttpOptions& options) {
  server.Get("/api/task", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!req.has_param("worker")) throw ProtocolError("missing 'worker' parameter");
      if (!req.has_param("kind")) throw ProtocolError("missing 'kind' parameter");
      const auto kind = parse_task_kind(req.get_param_value("kind"));
      std::optional<RoomCategory> room;
      if (req.has_param("room")) room = parse_room(req.get_param_value("room"));
      const auto task = service.next_task(req.get_param_value("worker"), kind, room);
      send_json(res, task ? *task : Json{{"empty", true}});
    });
  });

  server.Post("/api/response", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, {{"seq", service.submit(Json::parse(req.body))}}); });
  });

  server.Get("/api/progress", [&service](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, to_json(service.progress())); });
  });

  server.Get("/api/anchors", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!req.has_param("room")) throw ProtocolError("missing 'room' parameter");
      const auto room = parse_room(req.get_param_value("room"));
      const auto anchors = service.anchors(room);
      send_json(res, {{"room", std::string(to_string(room))}, {"anchors", anchors}});
    });
  });

  server.Get(R"(/api/photo/([A-Za-z0-9_\-][A-Za-z0-9_.\-]*))",
             [options](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 const std::string id = req.matches[1];
                 if (options.assets) {
                   if (auto asset = find_asset(*options.assets, id)) {
                     res.set_content(read_text_file(asset->first), asset->second);
                     return;
                   }
                 }
                 if (options.dataset != nullptr) {
                   const auto it = options.dataset->photos.find(id);
                   if (it != options.dataset->photos.end()) {
                     res.set_content(placeholder_svg(it->second, options.tutorial_levels), "image/svg+xml");
                     return;
                   }
                 }
                 throw NotFoundError("no photo " + id);
               });
             });

  if (options.static_dir) server.set_mount_point("/", options.static_dir->string());
}

}  // namespace luxappraise
