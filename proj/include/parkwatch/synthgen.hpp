#pragma once

// Deterministic synthetic street scenes with ground truth.
//
// Every pixel value is a pure function of (script, frame index, position):
// textures and noise come from a counter-based hash, so frames can be
// rendered in any order and reproduce byte for byte.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "parkwatch/core.hpp"
#include "parkwatch/event_engine.hpp"
#include "parkwatch/frame_io.hpp"
#include "parkwatch/json_util.hpp"

namespace parkwatch::synth {

// ----------------------------------------------------------------------------
// Script
// ----------------------------------------------------------------------------

struct Waypoint {
  std::int64_t frame = 0;
  int x = 0;
  int y = 0;
};

struct Actor {
  int width = 40;
  int height = 20;
  int tone = 190;
  int texture_amplitude = 45;
  std::uint64_t texture_seed = 1;
  std::vector<Waypoint> waypoints;
  std::optional<std::int64_t> removal_frame;
};

struct Background {
  enum class Kind { Flat, Gradient };
  Kind kind = Kind::Flat;
  int value = 90;
  int from = 60;
  int to = 140;
  bool horizontal = true;
};

/// Gain and offset move linearly from (1, 0) to (gain, offset) across
/// [start_frame, end_frame] and hold afterwards.
struct IlluminationRamp {
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 1;
  double gain = 1.0;
  double offset = 0.0;
};

struct Noise {
  int amplitude = 0;
  std::uint64_t seed = 0;
};

struct SceneScript {
  int width = 240;
  int height = 80;
  std::int64_t frames = 100;
  double fps = 30.0;
  Background background;
  std::vector<Actor> actors;
  std::optional<IlluminationRamp> illumination;
  Noise noise;

  void validate() const;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  JsonObject::fail(path, what);
}

inline std::uint64_t mix(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) noexcept {
  return mix(seed ^ mix(a ^ mix(b ^ mix(c))));
}

/// Uniform integer in [-amplitude, amplitude].
inline int symmetric(std::uint64_t h, int amplitude) noexcept {
  if (amplitude <= 0) return 0;
  const auto span = static_cast<std::uint64_t>(2 * amplitude + 1);
  return static_cast<int>(h % span) - amplitude;
}

}  // namespace detail

inline void SceneScript::validate() const {
  using detail::fail;
  if (width <= 0) fail("/width", "must be positive");
  if (height <= 0) fail("/height", "must be positive");
  if (frames <= 0) fail("/frames", "must be positive");
  if (!(fps > 0.0)) fail("/fps", "must be positive");
  if (background.kind == Background::Kind::Flat) {
    if (background.value < 0 || background.value > 255)
      fail("/background/value", "must be in [0, 255]");
  } else {
    if (background.from < 0 || background.from > 255)
      fail("/background/from", "must be in [0, 255]");
    if (background.to < 0 || background.to > 255)
      fail("/background/to", "must be in [0, 255]");
  }
  for (std::size_t i = 0; i < actors.size(); ++i) {
    const auto& a = actors[i];
    const auto p = "/actors/" + std::to_string(i);
    if (a.width <= 0 || a.height <= 0) fail(p + "/size", "must be positive");
    if (a.tone < 0 || a.tone > 255) fail(p + "/tone", "must be in [0, 255]");
    if (a.texture_amplitude < 1 || a.texture_amplitude > 127)
      fail(p + "/texture_amplitude", "must be in [1, 127]");
    if (a.waypoints.empty()) fail(p + "/waypoints", "must not be empty");
    for (std::size_t k = 0; k < a.waypoints.size(); ++k) {
      const auto& w = a.waypoints[k];
      const auto wp = p + "/waypoints/" + std::to_string(k);
      if (w.frame < 0) fail(wp + "/frame", "must be >= 0");
      if (k > 0 && w.frame <= a.waypoints[k - 1].frame)
        fail(wp + "/frame", "waypoint frames must be strictly increasing");
      if (!Rect{w.x, w.y, a.width, a.height}.inside(width, height))
        fail(wp, "actor lies outside the frame");
    }
    if (a.removal_frame && *a.removal_frame <= a.waypoints.front().frame)
      fail(p + "/removal_frame", "must follow the first waypoint");
  }
  if (illumination && illumination->end_frame <= illumination->start_frame)
    fail("/illumination/end_frame", "must exceed start_frame");
  if (noise.amplitude < 0 || noise.amplitude > 255)
    fail("/noise/amplitude", "must be in [0, 255]");
}

/// Parses and validates a scene script document.
inline SceneScript parse_script(const nlohmann::json& doc) {
  SceneScript s;
  JsonObject root(doc, "");
  s.width = root.get<int>("width");
  s.height = root.get<int>("height");
  s.frames = root.get<std::int64_t>("frames");
  s.fps = root.get_or<double>("fps", 30.0);
  if (root.has("background")) {
    auto bg = root.object("background");
    const auto kind = bg.get_or<std::string>("type", "flat");
    if (kind == "flat") {
      s.background.kind = Background::Kind::Flat;
      s.background.value = bg.get<int>("value");
    } else if (kind == "gradient") {
      s.background.kind = Background::Kind::Gradient;
      s.background.from = bg.get<int>("from");
      s.background.to = bg.get<int>("to");
      const auto dir = bg.get_or<std::string>("direction", "horizontal");
      if (dir != "horizontal" && dir != "vertical")
        JsonObject::fail(bg.child_path("direction"),
                         "expected \"horizontal\" or \"vertical\"");
      s.background.horizontal = dir == "horizontal";
    } else {
      JsonObject::fail(bg.child_path("type"),
                       "expected \"flat\" or \"gradient\"");
    }
    bg.reject_unknown();
  }
  if (root.has("actors")) {
    const auto& arr = root.raw("actors");
    if (!arr.is_array()) JsonObject::fail("/actors", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      JsonObject a(arr[i], "/actors/" + std::to_string(i));
      Actor actor;
      const auto& size = a.raw("size");
      if (!size.is_array() || size.size() != 2)
        JsonObject::fail(a.child_path("size"), "expected [w, h]");
      actor.width = JsonObject::convert<int>(size[0], a.child_path("size") + "/0");
      actor.height = JsonObject::convert<int>(size[1], a.child_path("size") + "/1");
      actor.tone = a.get_or<int>("tone", actor.tone);
      actor.texture_amplitude =
          a.get_or<int>("texture_amplitude", actor.texture_amplitude);
      actor.texture_seed =
          a.get_or<std::uint64_t>("texture_seed", static_cast<std::uint64_t>(i + 1));
      const auto& wps = a.raw("waypoints");
      if (!wps.is_array())
        JsonObject::fail(a.child_path("waypoints"), "expected an array");
      for (std::size_t k = 0; k < wps.size(); ++k) {
        JsonObject w(wps[k], a.child_path("waypoints") + "/" + std::to_string(k));
        actor.waypoints.push_back({w.get<std::int64_t>("frame"),
                                   w.get<int>("x"), w.get<int>("y")});
        w.reject_unknown();
      }
      if (a.has("removal_frame"))
        actor.removal_frame = a.get<std::int64_t>("removal_frame");
      a.reject_unknown();
      s.actors.push_back(std::move(actor));
    }
  }
  if (root.has("illumination")) {
    auto il = root.object("illumination");
    IlluminationRamp r;
    r.start_frame = il.get<std::int64_t>("start_frame");
    r.end_frame = il.get<std::int64_t>("end_frame");
    r.gain = il.get_or<double>("gain", 1.0);
    r.offset = il.get_or<double>("offset", 0.0);
    il.reject_unknown();
    s.illumination = r;
  }
  if (root.has("noise")) {
    auto n = root.object("noise");
    s.noise.amplitude = n.get_or<int>("amplitude", 0);
    s.noise.seed = n.get_or<std::uint64_t>("seed", 0);
    n.reject_unknown();
  }
  root.reject_unknown();
  s.validate();
  return s;
}

inline SceneScript load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_script(doc);
}

// ----------------------------------------------------------------------------
// Rendering
// ----------------------------------------------------------------------------

/// Actor box at `frame`, or nothing when the actor is not in the scene.
inline std::optional<Rect> actor_rect(const Actor& a, std::int64_t frame) {
  const auto& wps = a.waypoints;
  if (frame < wps.front().frame) return std::nullopt;
  if (a.removal_frame && frame >= *a.removal_frame) return std::nullopt;
  if (frame >= wps.back().frame)
    return Rect{wps.back().x, wps.back().y, a.width, a.height};
  std::size_t k = 0;
  while (wps[k + 1].frame <= frame) ++k;
  const auto& p = wps[k];
  const auto& q = wps[k + 1];
  const double t = static_cast<double>(frame - p.frame) /
                   static_cast<double>(q.frame - p.frame);
  const auto x = static_cast<int>(std::lround(p.x + t * (q.x - p.x)));
  const auto y = static_cast<int>(std::lround(p.y + t * (q.y - p.y)));
  return Rect{x, y, a.width, a.height};
}

inline int background_value(const SceneScript& s, int x, int y) {
  const auto& bg = s.background;
  if (bg.kind == Background::Kind::Flat) return bg.value;
  const int extent = bg.horizontal ? s.width : s.height;
  const int pos = bg.horizontal ? x : y;
  if (extent <= 1) return bg.from;
  const double t = static_cast<double>(pos) / (extent - 1);
  return static_cast<int>(std::lround(bg.from + t * (bg.to - bg.from)));
}

inline std::pair<double, double> illumination_at(const SceneScript& s,
                                                 std::int64_t frame) {
  if (!s.illumination) return {1.0, 0.0};
  const auto& r = *s.illumination;
  if (frame <= r.start_frame) return {1.0, 0.0};
  if (frame >= r.end_frame) return {r.gain, r.offset};
  const double t = static_cast<double>(frame - r.start_frame) /
                   static_cast<double>(r.end_frame - r.start_frame);
  return {1.0 + t * (r.gain - 1.0), t * r.offset};
}

inline int texture_value(const Actor& a, int u, int v) {
  const int d = detail::symmetric(
      detail::hash(a.texture_seed, 0x7e47u, static_cast<std::uint64_t>(u),
                   static_cast<std::uint64_t>(v)),
      a.texture_amplitude);
  return std::clamp(a.tone + d, 0, 255);
}

inline GrayFrame render_frame(const SceneScript& s, std::int64_t frame) {
  Raster<int> canvas(s.width, s.height);
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) canvas(x, y) = background_value(s, x, y);
  for (const auto& a : s.actors) {
    const auto r = actor_rect(a, frame);
    if (!r) continue;
    for (int v = 0; v < r->h; ++v)
      for (int u = 0; u < r->w; ++u)
        canvas(r->x + u, r->y + v) = texture_value(a, u, v);
  }
  const auto [gain, offset] = illumination_at(s, frame);
  Image8 img(s.width, s.height);
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      double p = gain * canvas(x, y) + offset;
      p += detail::symmetric(
          detail::hash(s.noise.seed, static_cast<std::uint64_t>(frame),
                       static_cast<std::uint64_t>(x),
                       static_cast<std::uint64_t>(y)),
          s.noise.amplitude);
      img(x, y) = clamp_u8(p);
    }
  return {std::move(img), frame, static_cast<double>(frame) / s.fps};
}

inline std::vector<GrayFrame> render_all(const SceneScript& s) {
  std::vector<GrayFrame> out;
  out.reserve(static_cast<std::size_t>(s.frames));
  for (std::int64_t f = 0; f < s.frames; ++f) out.push_back(render_frame(s, f));
  return out;
}

// ----------------------------------------------------------------------------
// Ground truth
// ----------------------------------------------------------------------------

struct Interval {
  std::int64_t begin = 0;
  std::int64_t end = 0;  // inclusive
};

/// Last frame on which the actor is drawn.
inline std::int64_t last_visible_frame(const SceneScript& s, const Actor& a) {
  auto last = s.frames - 1;
  if (a.removal_frame) last = std::min(last, *a.removal_frame - 1);
  return last;
}

/// Maximal runs of frames during which the actor holds one position.
inline std::vector<Interval> static_intervals(const SceneScript& s,
                                              const Actor& a) {
  std::vector<Interval> out;
  const auto& wps = a.waypoints;
  const auto last = last_visible_frame(s, a);
  std::size_t i = 0;
  while (i < wps.size()) {
    std::size_t j = i;
    while (j + 1 < wps.size() && wps[j + 1].x == wps[i].x &&
           wps[j + 1].y == wps[i].y)
      ++j;
    auto end = (j + 1 == wps.size()) ? last : wps[j].frame;
    end = std::min(end, last);
    const auto begin = wps[i].frame;
    if (end > begin) out.push_back({begin, end});
    i = j + 1;
  }
  return out;
}

struct TruthEvent {
  std::string event_type;  // static_begin, static_end, occluded_begin,
                           // occluded_end, removed
  int actor_id = 0;        // 1-based script order
  std::int64_t frame_index = 0;
  Rect bbox;
  double duration_s = 0.0;
};

inline std::vector<TruthEvent> ground_truth(const SceneScript& s) {
  std::vector<TruthEvent> out;
  const auto secs = [&](std::int64_t f) { return static_cast<double>(f) / s.fps; };
  for (std::size_t i = 0; i < s.actors.size(); ++i) {
    const auto& a = s.actors[i];
    const int id = static_cast<int>(i) + 1;
    for (const auto& iv : static_intervals(s, a)) {
      const Rect box = *actor_rect(a, iv.begin);
      out.push_back({"static_begin", id, iv.begin, box, 0.0});
      out.push_back({"static_end", id, iv.end, box, secs(iv.end - iv.begin)});
      // Occlusion by actors drawn later (on top).
      std::optional<std::int64_t> run;
      for (auto f = iv.begin; f <= iv.end + 1; ++f) {
        bool covered = false;
        if (f <= iv.end)
          for (std::size_t k = i + 1; k < s.actors.size() && !covered; ++k) {
            const auto other = actor_rect(s.actors[k], f);
            covered = other && !intersect(*other, box).empty();
          }
        if (covered && !run) run = f;
        if (!covered && run) {
          out.push_back({"occluded_begin", id, *run, box, 0.0});
          out.push_back({"occluded_end", id, f - 1, box, secs(f - 1 - *run)});
          run.reset();
        }
      }
    }
    if (a.removal_frame && *a.removal_frame < s.frames) {
      const auto box = actor_rect(a, *a.removal_frame - 1);
      out.push_back({"removed", id, *a.removal_frame,
                     box.value_or(Rect{a.waypoints.back().x,
                                       a.waypoints.back().y, a.width,
                                       a.height}),
                     0.0});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const TruthEvent& x, const TruthEvent& y) {
                     return x.frame_index != y.frame_index
                                ? x.frame_index < y.frame_index
                                : x.actor_id < y.actor_id;
                   });
  return out;
}

inline std::string to_json_line(const TruthEvent& e, double fps) {
  return event_json(e.event_type, e.actor_id, e.frame_index,
                    static_cast<double>(e.frame_index) / fps, e.bbox,
                    std::nullopt, e.duration_s)
      .dump();
}

/// Writes `frame_%06d.pgm` files and `ground_truth.jsonl` into `dir`.
/// Refuses a non-empty directory unless `overwrite` is set.
inline void render_to_disk(const SceneScript& s,
                           const std::filesystem::path& dir, bool overwrite) {
  namespace fs = std::filesystem;
  if (fs::exists(dir) && !fs::is_directory(dir))
    throw IoError(dir.string() + ": exists and is not a directory");
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!overwrite)
      throw IoError(dir.string() +
                    ": output directory is not empty (use --overwrite)");
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto name = entry.path().filename().string();
      if (name.rfind("frame_", 0) == 0 || name == "ground_truth.jsonl")
        fs::remove(entry.path());
    }
  }
  fs::create_directories(dir);
  char name[32];
  for (std::int64_t f = 0; f < s.frames; ++f) {
    std::snprintf(name, sizeof name, "frame_%06lld.pgm",
                  static_cast<long long>(f));
    write_pgm(dir / name, render_frame(s, f).image);
  }
  std::ofstream gt(dir / "ground_truth.jsonl");
  if (!gt) throw IoError((dir / "ground_truth.jsonl").string() + ": cannot open");
  for (const auto& e : ground_truth(s)) gt << to_json_line(e, s.fps) << '\n';
}

}  // namespace parkwatch::synth
