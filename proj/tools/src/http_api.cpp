#include "proxkit/tools/http_api.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>

#include "proxkit/error.hpp"

namespace proxkit::http {

using nlohmann::json;

namespace {

/// Thrown for malformed requests (bad JSON, missing fields or parameters).
struct BadRequest : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename T>
T field(const json& body, const char* name) {
  const auto it = body.find(name);
  if (it == body.end()) throw BadRequest(std::string("missing field '") + name + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw BadRequest(std::string("field '") + name + "' has the wrong type");
  }
}

template <typename T>
T field_or(const json& body, const char* name, T fallback) {
  return body.contains(name) ? field<T>(body, name) : fallback;
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw BadRequest("body must be a JSON object");
  return body;
}

std::int64_t integer_param(const std::string& text, const char* what) {
  std::int64_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw BadRequest(std::string(what) + " must be an integer");
  }
  return v;
}

SliceKey slice_from_query(const httplib::Request& req) {
  if (!req.has_param("coder") || !req.has_param("pass")) {
    throw BadRequest("query parameters 'coder' and 'pass' are required");
  }
  return {req.get_param_value("coder"),
          static_cast<int>(integer_param(req.get_param_value("pass"), "pass"))};
}

SessionMeta meta_from_json(const json& j) {
  if (!j.is_object()) throw BadRequest("'meta' must be an object");
  SessionMeta m;
  m.session_id = field<std::string>(j, "session_id");
  const auto agent = field_or<std::string>(j, "agent_type", "robot");
  const auto type = agent_type_from_name(agent);
  if (!type) throw Error(Errc::InvalidMeta, "unknown agent_type '" + agent + "'");
  m.agent_type = *type;
  m.group_size = field<int>(j, "group_size");
  m.frame_stride = field_or<int>(j, "frame_stride", 4);
  m.frames_per_second = field_or<double>(j, "fps", 25.0);
  if (j.contains("grid_cm")) {
    const auto grid = field<std::vector<int>>(j, "grid_cm");
    if (grid.size() != 2) throw BadRequest("grid_cm must hold two integers");
    m.grid_cm = {grid[0], grid[1]};
  }
  return m;
}

Zone zone_from_json(const json& body) {
  const auto code = field<std::string>(body, "zone");
  if (code.size() == 1) return parse_zone(code);
  for (Zone z : kAllZones) {
    if (zone_name(z) == code) return z;
  }
  throw Error(Errc::UnknownZoneCode, "unknown zone '" + code + "'");
}

json ack_json(const LabelAck& ack) {
  return {{"coder_id", ack.key.coder_id},
          {"pass_id", ack.key.pass_id},
          {"frame_index", ack.key.frame_index},
          {"track_id", ack.key.track_id},
          {"zone", std::string(1, zone_code(ack.zone))},
          {"note", ack.note},
          {"sequence", ack.sequence}};
}

std::string content_type_for(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".gif") return "image/gif";
  if (ext == ".bmp") return "image/bmp";
  if (ext == ".webp") return "image/webp";
  return "application/octet-stream";
}

void send_error(httplib::Response& res, int status, std::string_view code,
                const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", code}, {"message", message}}.dump(), "application/json");
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

int status_for(Errc code) noexcept {
  switch (code) {
    case Errc::UnknownSession:
    case Errc::UnknownFrame:
    case Errc::UnknownTrack:
    case Errc::UnknownLabel:
      return 404;
    case Errc::DuplicateSession:
      return 409;
    case Errc::Io:
      return 500;
    default:
      return 422;
  }
}

struct ApiServer::Impl {
  explicit Impl(AnnotationService& s) : service(s) {}

  AnnotationService& service;
  httplib::Server server;

  /// Runs `fn`, turning exceptions into JSON error responses.
  template <typename Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const BadRequest& e) {
        send_error(res, 400, "BadRequest", e.what());
      } catch (const Error& e) {
        send_error(res, status_for(e.code()), errc_name(e.code()), e.what());
      }
    };
  }

  void create_session(const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    if (!body.contains("meta")) throw BadRequest("missing field 'meta'");
    const auto meta = meta_from_json(body["meta"]);

    FrameManifest manifest;
    manifest.frame_stride = field_or<int>(body, "frame_stride", meta.frame_stride);
    if (body.contains("manifest")) {
      const auto& list = body["manifest"];
      if (!list.is_array()) throw BadRequest("'manifest' must be an array");
      for (const auto& entry : list) {
        if (!entry.is_object()) throw BadRequest("manifest entries must be objects");
        manifest.frames.push_back({field<std::int64_t>(entry, "frame_index"),
                                   field<std::string>(entry, "path")});
      }
    } else {
      if (!is_token(meta.session_id)) {
        throw Error(Errc::InvalidMeta, "session_id must be a token");
      }
      manifest = scan_frame_directory(
          std::filesystem::absolute(service.frames_root() / meta.session_id), meta.frame_stride);
    }
    const auto tracks = field_or<std::vector<std::string>>(body, "tracks", {});
    service.create_session(meta, manifest, tracks);

    const auto progress = service.progress(meta.session_id);
    json track_ids = json::array();
    for (const auto& t : progress) track_ids.push_back(t.track_id);
    send_json(res,
              {{"session_id", meta.session_id},
               {"frames", progress.empty() ? 0 : progress.front().total},
               {"tracks", track_ids}},
              201);
  }

  void frame(const httplib::Request& req, httplib::Response& res) {
    const auto& id = req.path_params.at("id");
    const auto index = integer_param(req.path_params.at("index"), "frame index");
    const auto path = service.frame_path(id, index);
    res.set_content(read_text_file(path), content_type_for(path));
  }

  void next(const httplib::Request& req, httplib::Response& res) {
    const auto unit = service.next_unit(req.path_params.at("id"), slice_from_query(req));
    if (unit.done) {
      send_json(res, {{"done", true}});
    } else {
      send_json(res, {{"done", false},
                      {"frame_index", unit.frame_index},
                      {"unlabeled_tracks", unit.unlabeled_tracks}});
    }
  }

  void label(const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    LabelEvent e;
    e.coder_id = field<std::string>(body, "coder_id");
    e.pass_id = field<int>(body, "pass_id");
    e.frame_index = field<std::int64_t>(body, "frame_index");
    e.track_id = field<std::string>(body, "track_id");
    e.zone = zone_from_json(body);
    e.note = field_or<std::string>(body, "note", "");
    send_json(res, ack_json(service.record_label(req.path_params.at("id"), std::move(e))));
  }

  void note(const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    RecordKey key{field<std::string>(body, "coder_id"), field<int>(body, "pass_id"),
                  field<std::int64_t>(body, "frame_index"), field<std::string>(body, "track_id")};
    send_json(res, ack_json(service.record_note(req.path_params.at("id"), key,
                                                field<std::string>(body, "note"))));
  }

  void progress(const httplib::Request& req, httplib::Response& res) {
    std::optional<SliceKey> slice;
    if (req.has_param("coder") || req.has_param("pass")) slice = slice_from_query(req);
    json tracks = json::array();
    for (const auto& t : service.progress(req.path_params.at("id"), slice)) {
      tracks.push_back({{"track_id", t.track_id}, {"labeled", t.labeled}, {"total", t.total}});
    }
    send_json(res, {{"tracks", tracks}});
  }

  void export_csv(const httplib::Request& req, httplib::Response& res) {
    const auto ex = service.export_session(req.path_params.at("id"), slice_from_query(req));
    res.set_header("X-Proxkit-Partial", ex.partial ? "true" : "false");
    res.set_content(ex.csv, "text/csv");
  }

  void export_meta(const httplib::Request& req, httplib::Response& res) {
    const auto ex = service.export_session(req.path_params.at("id"), slice_from_query(req));
    res.set_content(ex.sidecar, "text/plain");
  }

  void install() {
    server.Post("/sessions", guarded([this](auto& q, auto& r) { create_session(q, r); }));
    server.Get("/sessions/:id/frames/:index", guarded([this](auto& q, auto& r) { frame(q, r); }));
    server.Get("/sessions/:id/next", guarded([this](auto& q, auto& r) { next(q, r); }));
    server.Post("/sessions/:id/labels", guarded([this](auto& q, auto& r) { label(q, r); }));
    server.Post("/sessions/:id/notes", guarded([this](auto& q, auto& r) { note(q, r); }));
    server.Get("/sessions/:id/progress", guarded([this](auto& q, auto& r) { progress(q, r); }));
    server.Get("/sessions/:id/export", guarded([this](auto& q, auto& r) { export_csv(q, r); }));
    server.Get("/sessions/:id/export/meta",
               guarded([this](auto& q, auto& r) { export_meta(q, r); }));
    server.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
          try {
            std::rethrow_exception(ep);
          } catch (const std::exception& e) {
            send_error(res, 500, "Internal", e.what());
          } catch (...) {
            send_error(res, 500, "Internal", "unknown failure");
          }
        });
  }
};

ApiServer::ApiServer(AnnotationService& service) : impl_(std::make_unique<Impl>(service)) {
  impl_->install();
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool ApiServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void ApiServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace proxkit::http
