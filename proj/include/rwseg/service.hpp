#pragma once

// Session-based HTTP API: upload an image, add strokes, run a segmentation,
// fetch overlays and traces. Mount on an httplib::Server with Service::mount.

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rwseg/imageio.hpp"
#include "rwseg/pipeline.hpp"
#include "rwseg/strokes.hpp"
#include "rwseg/trace_json.hpp"

namespace rwseg::service {

using nlohmann::json;

// --- stroke JSON --------------------------------------------------------------

inline const char* to_string(StrokeKind k) noexcept {
  switch (k) {
    case StrokeKind::foreground: return "foreground";
    case StrokeKind::background: return "background";
    case StrokeKind::erase: return "erase";
  }
  return "unknown";
}

inline json to_json(const Stroke& s) {
  json pts = json::array();
  for (const auto& p : s.points) pts.push_back({p.x, p.y});
  return {{"kind", to_string(s.kind)}, {"radius", s.radius}, {"points", pts}};
}

/// {"kind": "foreground"|"background"|"erase", "radius": r, "points": [[x, y], ...]}
inline Stroke stroke_from_json(const json& j) {
  try {
    Stroke s;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "foreground" || kind == "F")
      s.kind = StrokeKind::foreground;
    else if (kind == "background" || kind == "B")
      s.kind = StrokeKind::background;
    else if (kind == "erase")
      s.kind = StrokeKind::erase;
    else
      throw Error(ErrorCode::invalid_input, "unknown stroke kind '" + kind + "'");
    s.radius = j.value("radius", 1.0);
    for (const auto& p : j.at("points")) {
      if (!p.is_array() || p.size() != 2) throw Error(ErrorCode::invalid_input, "points are [x, y] pairs");
      s.points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_input, std::string("malformed stroke: ") + e.what());
  }
}

// --- sessions -------------------------------------------------------------

inline std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

struct RunRecord {
  Algorithm algorithm = Algorithm::rw;
  FeedbackResult result;
  std::vector<std::size_t> boundary;
  double elapsed_ms = 0.0;
};

struct Session {
  std::string id;
  ImageGrid image;
  std::vector<Stroke> strokes;
  FeedbackParams params;
  std::optional<RunRecord> last;
  std::int64_t created = 0;
  std::int64_t updated = 0;

  /// Held for the whole of a mutating request; contenders get 409.
  std::mutex busy;
  /// Guards the fields above for short reads and writes.
  std::mutex data;

  SeedState seeds() const { return replay_strokes(strokes, image.width(), image.height()); }
};

struct ServiceConfig {
  std::optional<std::filesystem::path> session_dir;
  std::size_t max_pixels = std::size_t{1} << 22;

  /// RWSEG_SESSION_DIR and RWSEG_MAX_PIXELS.
  static ServiceConfig from_env() {
    ServiceConfig c;
    if (const char* d = std::getenv("RWSEG_SESSION_DIR"); d && *d) c.session_dir = d;
    if (const char* m = std::getenv("RWSEG_MAX_PIXELS"); m && *m) c.max_pixels = std::stoull(m);
    return c;
  }
};

class Service {
 public:
  explicit Service(ServiceConfig config = {}) : config_(std::move(config)) {
    if (config_.session_dir) {
      std::filesystem::create_directories(*config_.session_dir);
      reload();
    }
  }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  std::size_t session_count() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
  }

  void mount(httplib::Server& srv) {
    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
    srv.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) { create(req, res); });
    srv.Get(R"(/sessions/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
      with_session(req, res, [&](Session& s) { info(s, res); });
    });
    srv.Delete(R"(/sessions/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) { remove(req, res); });
    srv.Post(R"(/sessions/([0-9a-f]+)/strokes)", [this](const httplib::Request& req, httplib::Response& res) {
      with_session(req, res, [&](Session& s) { mutate(s, res, [&] { strokes(s, req, res); }); });
    });
    srv.Post(R"(/sessions/([0-9a-f]+)/segment)", [this](const httplib::Request& req, httplib::Response& res) {
      with_session(req, res, [&](Session& s) { mutate(s, res, [&] { segment(s, req, res); }); });
    });
    srv.Get(R"(/sessions/([0-9a-f]+)/(probability\.png|probability\.pmap|labels\.png|boundary\.png|trace\.json))",
            [this](const httplib::Request& req, httplib::Response& res) {
              with_session(req, res, [&](Session& s) { artifact(s, req.matches[2].str(), res); });
            });
  }

 private:
  static void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                         json extra = json::object()) {
    extra["error"] = code;
    extra["message"] = message;
    res.status = status;
    res.set_content(extra.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, const Error& e) {
    json extra = json::object();
    int status = 422;
    if (const auto* cv = dynamic_cast<const ConvexityViolation*>(&e)) {
      extra["lambda"] = cv->lambda();
      extra["lambda_bound"] = cv->bound();
    }
    switch (e.code()) {
      case ErrorCode::solver_failure:
      case ErrorCode::not_positive_definite:
      case ErrorCode::singular_system: status = 500; break;
      case ErrorCode::unsupported_format: status = 415; break;
      default: break;
    }
    send_error(res, status, to_string(e.code()), e.what(), std::move(extra));
  }

  std::shared_ptr<Session> find(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  template <class F>
  void with_session(const httplib::Request& req, httplib::Response& res, F&& f) {
    auto s = find(req.matches[1].str());
    if (!s) return send_error(res, 404, "unknown_session", "no session " + req.matches[1].str());
    try {
      f(*s);
    } catch (const Error& e) {
      send_error(res, e);
    }
  }

  template <class F>
  void mutate(Session& s, httplib::Response& res, F&& f) {
    std::unique_lock busy(s.busy, std::try_to_lock);
    if (!busy.owns_lock()) return send_error(res, 409, "busy", "session " + s.id + " is processing another request");
    f();
  }

  static json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
      return json::parse(req.body);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::invalid_input, std::string("malformed JSON body: ") + e.what());
    }
  }

  static std::string new_id() {
    static std::mutex m;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(m);
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                  static_cast<unsigned long long>(rng()));
    return buf;
  }

  static double lambda_bound(const Session& s) {
    return compute_weights(s.image, s.params.beta, s.params.weight_floor).min_weight();
  }

  void create(const httplib::Request& req, httplib::Response& res) {
    try {
      std::string bytes;
      json overrides;
      if (req.is_multipart_form_data()) {
        if (!req.has_file("image")) return send_error(res, 422, "invalid_input", "multipart field 'image' is missing");
        bytes = req.get_file_value("image").content;
        if (req.has_file("params")) overrides = json::parse(req.get_file_value("params").content);
      } else {
        bytes = req.body;
      }
      const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data());
      const auto raster = io::decode_raster({p, bytes.size()});
      if (raster.width * raster.height > config_.max_pixels)
        return send_error(res, 413, "too_large",
                          "image has " + std::to_string(raster.width * raster.height) + " pixels, limit is " +
                              std::to_string(config_.max_pixels));
      auto s = std::make_shared<Session>();
      s->id = new_id();
      s->image = io::to_image(raster);
      apply_overrides(s->params, overrides);
      s->created = s->updated = now_ms();
      persist(*s);
      {
        std::lock_guard lock(mutex_);
        sessions_[s->id] = s;
      }
      res.status = 201;
      res.set_content(json{{"id", s->id},
                           {"width", s->image.width()},
                           {"height", s->image.height()},
                           {"lambda_bound", lambda_bound(*s)}}
                          .dump(),
                      "application/json");
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const json::exception& e) {
      send_error(res, 422, "invalid_input", std::string("malformed params: ") + e.what());
    }
  }

  void info(Session& s, httplib::Response& res) {
    std::lock_guard lock(s.data);
    const auto seeds = s.seeds();
    json j{{"id", s.id},
           {"width", s.image.width()},
           {"height", s.image.height()},
           {"strokes", s.strokes.size()},
           {"foreground_seeds", seeds.foreground.size()},
           {"background_seeds", seeds.background.size()},
           {"params", rwseg::to_json(s.params)},
           {"lambda_bound", lambda_bound(s)},
           {"has_result", s.last.has_value()},
           {"created", s.created},
           {"updated", s.updated}};
    res.set_content(j.dump(), "application/json");
  }

  void remove(const httplib::Request& req, httplib::Response& res) {
    const auto id = req.matches[1].str();
    auto s = find(id);
    if (!s) return send_error(res, 404, "unknown_session", "no session " + id);
    std::unique_lock busy(s->busy, std::try_to_lock);
    if (!busy.owns_lock()) return send_error(res, 409, "busy", "session " + id + " is processing another request");
    {
      std::lock_guard lock(mutex_);
      sessions_.erase(id);
    }
    if (config_.session_dir) {
      std::error_code ec;
      std::filesystem::remove_all(*config_.session_dir / id, ec);
    }
    res.status = 204;
  }

  /// {"op": "draw", "kind": ..., "radius": ..., "points": ...} | {"op": "undo"} | {"op": "clear"}.
  /// "op" defaults to draw; an erase is a draw with kind "erase".
  void strokes(Session& s, const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    const auto op = body.value("op", std::string("draw"));
    if (op == "erase") body["kind"] = "erase";
    std::lock_guard lock(s.data);
    if (op == "draw" || op == "erase") {
      auto stroke = stroke_from_json(body);
      validate_stroke(stroke, s.image.width(), s.image.height());
      s.strokes.push_back(std::move(stroke));
    } else if (op == "undo") {
      if (s.strokes.empty()) throw Error(ErrorCode::invalid_input, "nothing to undo");
      s.strokes.pop_back();
    } else if (op == "clear") {
      s.strokes.clear();
    } else {
      throw Error(ErrorCode::invalid_input, "unknown stroke op '" + op + "'");
    }
    s.updated = now_ms();
    persist(s);
    const auto seeds = s.seeds();
    res.set_content(json{{"strokes", s.strokes.size()},
                         {"foreground_seeds", seeds.foreground.size()},
                         {"background_seeds", seeds.background.size()}}
                        .dump(),
                    "application/json");
  }

  /// {"algorithm": "rw"|"brw"|"irw"|"ibrw", "params": {...}, "tolerance": t}
  void segment(Session& s, const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    Algorithm algo = Algorithm::ibrw;
    SolveOptions opts;
    FeedbackParams params;
    ImageGrid image;
    SeedState seeds;
    try {
      if (body.contains("algorithm")) algo = parse_algorithm(body.at("algorithm").get<std::string>());
      if (body.contains("tolerance")) opts.tolerance = body.at("tolerance").get<double>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::invalid_input, "algorithm must be a string and tolerance a number");
    }
    opts.validate();
    {
      std::lock_guard lock(s.data);
      params = s.params;
      image = s.image;
      seeds = s.seeds();
    }
    apply_overrides(params, body.value("params", json::object()));
    const auto t0 = std::chrono::steady_clock::now();
    RunRecord run{algo, run_algorithm(algo, image, seeds, params, opts), {}, 0.0};
    run.boundary = final_boundary(run.result, params.delta);
    run.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    json potentials = json::array(), boundary = json::array();
    for (const auto& r : run.result.trace.records) {
      potentials.push_back(r.potential);
      boundary.push_back(r.boundary_count);
    }
    const auto& last = run.result.trace.records.back();
    json summary{{"algorithm", to_string(algo)},
                 {"iterations", run.result.trace.outer_iterations()},
                 {"stop", rwseg::to_string(run.result.trace.stop)},
                 {"degraded", run.result.trace.degraded},
                 {"notes", run.result.trace.notes},
                 {"xi", run.result.trace.xi},
                 {"potentials", potentials},
                 {"boundary", boundary},
                 {"final_boundary", run.boundary.size()},
                 {"foreground_seeds", last.foreground_seeds},
                 {"background_seeds", last.background_seeds},
                 {"elapsed_ms", run.elapsed_ms}};
    {
      std::lock_guard lock(s.data);
      s.params = params;
      s.last = std::move(run);
      s.updated = now_ms();
      persist(s);
    }
    res.set_content(summary.dump(), "application/json");
  }

  void artifact(Session& s, const std::string& name, httplib::Response& res) {
    std::lock_guard lock(s.data);
    if (!s.last) return send_error(res, 404, "no_result", "session " + s.id + " has not been segmented yet");
    const auto& r = s.last->result;
    const auto w = s.image.width();
    const auto h = s.image.height();
    auto send = [&](const io::Bytes& b, const char* type) {
      res.set_content(std::string(b.begin(), b.end()), type);
    };
    if (name == "probability.png") return send(io::encode_probability_png(r.map), "image/png");
    if (name == "probability.pmap")
      return send(io::encode_probability_raster(w, h, r.map.raw), "application/octet-stream");
    if (name == "labels.png") return send(io::encode_labels_png(r.map.labels, w, h), "image/png");
    if (name == "boundary.png") return send(io::encode_boundary_png(s.last->boundary, w, h), "image/png");
    auto j = rwseg::to_json(r.trace);
    j["algorithm"] = to_string(s.last->algorithm);
    res.set_content(j.dump(), "application/json");
  }

  // --- write-through ---------------------------------------------------------

  void persist(const Session& s) const {
    if (!config_.session_dir) return;
    const auto dir = *config_.session_dir / s.id;
    std::filesystem::create_directories(dir);
    io::write_file(dir / "image.png", io::encode_png(io::from_image(s.image)));
    json journal = json::array();
    for (const auto& st : s.strokes) journal.push_back(to_json(st));
    json meta{{"strokes", journal}, {"params", rwseg::to_json(s.params)}, {"created", s.created}, {"updated", s.updated}};
    const auto tmp = dir / "session.json.tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << meta.dump(2);
      if (!out) throw Error(ErrorCode::invalid_input, "cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, dir / "session.json");
  }

  void reload() {
    for (const auto& e : std::filesystem::directory_iterator(*config_.session_dir)) {
      if (!e.is_directory()) continue;
      const auto dir = e.path();
      if (!std::filesystem::exists(dir / "image.png") || !std::filesystem::exists(dir / "session.json")) continue;
      try {
        auto s = std::make_shared<Session>();
        s->id = dir.filename().string();
        s->image = io::load_image(dir / "image.png");
        std::ifstream in(dir / "session.json");
        const auto meta = json::parse(in);
        for (const auto& st : meta.at("strokes")) s->strokes.push_back(stroke_from_json(st));
        apply_overrides(s->params, meta.at("params"));
        s->created = meta.value("created", std::int64_t{0});
        s->updated = meta.value("updated", std::int64_t{0});
        sessions_[s->id] = s;
      } catch (const std::exception&) {
        // unreadable session directories are skipped
      }
    }
  }

  ServiceConfig config_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace rwseg::service
