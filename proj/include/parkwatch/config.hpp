#pragma once

// Run configuration: one JSON document, optionally patched by dotted-path
// overrides (`dual.alpha_slow=0.001`). Unknown keys are rejected and every
// validation message names the offending key as a JSON pointer.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "parkwatch/dual_bg_detector.hpp"
#include "parkwatch/event_engine.hpp"
#include "parkwatch/frame_io.hpp"
#include "parkwatch/json_util.hpp"
#include "parkwatch/ncc_monitor.hpp"
#include "parkwatch/single_bg_detector.hpp"

namespace parkwatch {

enum class PipelineKind { Single, Dual };

inline const char* to_string(PipelineKind k) noexcept {
  return k == PipelineKind::Single ? "single" : "dual";
}

struct InputConfig {
  std::string path;
  bool raw = false;
  int width = 0;  // raw mode only
  int height = 0;
};

struct OutputConfig {
  std::string events = "events.jsonl";
  std::optional<std::string> summary_csv;
  std::optional<std::string> mask_dump_dir;
};

struct RunConfig {
  InputConfig input;
  double fps = 30.0;
  RoiSpec roi;
  PipelineKind pipeline = PipelineKind::Single;
  SingleDetectorParams single;
  DualDetectorParams dual;
  MonitorParams monitor;
  EventParams events;
  OutputConfig output;
};

/// Sets `dotted.key.path` in `doc` to `value` (parsed as JSON when it is
/// valid JSON, otherwise taken as a string).
inline void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "': expected key=value");
  const auto key = assignment.substr(0, eq);
  const auto text = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    value = text;
  }
  nlohmann::json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const auto part = key.substr(start, dot - start);
    if (part.empty())
      throw ConfigError("override '" + assignment + "': empty key segment");
    if (!node->is_object()) *node = nlohmann::json::object();
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

namespace detail {

inline void check(const std::string& path, bool ok, const char* what) {
  if (!ok) JsonObject::fail(path, what);
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& doc) {
  using detail::check;
  RunConfig c;
  JsonObject root(doc, "");

  auto in = root.object("input");
  c.input.path = in.get<std::string>("path");
  const auto mode = in.get_or<std::string>("mode", "directory");
  check(in.child_path("mode"), mode == "directory" || mode == "raw",
        "expected \"directory\" or \"raw\"");
  c.input.raw = mode == "raw";
  if (c.input.raw) {
    c.input.width = in.get<int>("width");
    c.input.height = in.get<int>("height");
    check(in.child_path("width"), c.input.width > 0, "must be positive");
    check(in.child_path("height"), c.input.height > 0, "must be positive");
  }
  in.reject_unknown();

  c.fps = root.get_or<double>("fps", 30.0);
  check("/fps", c.fps > 0.0, "must be positive");

  if (root.has("roi")) {
    const auto& arr = root.raw("roi");
    check("/roi", arr.is_array(), "expected an array of [x, y, w, h]");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto p = "/roi/" + std::to_string(i);
      const auto r = parse_rect(arr[i], p);
      check(p, r.x >= 0 && r.y >= 0 && r.w > 0 && r.h > 0,
            "rectangle must have non-negative origin and positive size");
      check(p, c.roi.rects.empty() || r.h == c.roi.rects.front().h,
            "all roi rectangles must share one height");
      c.roi.rects.push_back(r);
    }
  }

  const auto pipeline = root.get_or<std::string>("pipeline", "single");
  check("/pipeline", pipeline == "single" || pipeline == "dual",
        "expected \"single\" or \"dual\"");
  c.pipeline = pipeline == "single" ? PipelineKind::Single : PipelineKind::Dual;

  GmmParams gmm;
  if (root.has("gmm")) {
    auto g = root.object("gmm");
    gmm.components = g.get_or("components", gmm.components);
    gmm.match_sigmas = g.get_or("match_sigmas", gmm.match_sigmas);
    gmm.background_ratio = g.get_or("background_ratio", gmm.background_ratio);
    gmm.initial_variance = g.get_or("initial_variance", gmm.initial_variance);
    gmm.variance_floor = g.get_or("variance_floor", gmm.variance_floor);
    g.reject_unknown();
    check("/gmm/components",
          gmm.components >= 1 && gmm.components <= GmmParams::kMaxComponents,
          "must be in [1, 8]");
    check("/gmm/match_sigmas", gmm.match_sigmas > 0.0, "must be positive");
    check("/gmm/background_ratio",
          gmm.background_ratio > 0.0 && gmm.background_ratio <= 1.0,
          "must be in (0, 1]");
    check("/gmm/variance_floor", gmm.variance_floor > 0.0, "must be positive");
    check("/gmm/initial_variance", gmm.initial_variance >= gmm.variance_floor,
          "must be >= variance_floor");
  }

  TrackerParams tracker;
  BlobParams blobs;
  if (root.has("tracking")) {
    auto t = root.object("tracking");
    tracker.overlap_threshold =
        t.get_or("overlap_threshold", tracker.overlap_threshold);
    check("/tracking/overlap_threshold",
          tracker.overlap_threshold >= 0.0 && tracker.overlap_threshold < 1.0,
          "must be in [0, 1)");
    const auto metric = t.get_or<std::string>("overlap_metric", "min_area");
    check("/tracking/overlap_metric", metric == "min_area" || metric == "iou",
          "expected \"min_area\" or \"iou\"");
    tracker.metric =
        metric == "iou" ? OverlapMetric::IoU : OverlapMetric::MinArea;
    tracker.miss_limit = t.get_or("miss_limit", tracker.miss_limit);
    check("/tracking/miss_limit", tracker.miss_limit >= 0, "must be >= 0");
    if (t.has("min_area") && !t.raw("min_area").is_null()) {
      blobs.min_area = t.get<std::int64_t>("min_area");
      check("/tracking/min_area", *blobs.min_area >= 1, "must be >= 1");
    }
    blobs.morph_radius = t.get_or("morph_radius", blobs.morph_radius);
    check("/tracking/morph_radius", blobs.morph_radius >= 1, "must be >= 1");
    t.reject_unknown();
  }

  if (root.has("events")) {
    auto e = root.object("events");
    c.events.stop_threshold_frames =
        e.get_or("stop_threshold_frames", c.events.stop_threshold_frames);
    c.events.park_threshold_frames =
        e.get_or("park_threshold_frames", c.events.park_threshold_frames);
    e.reject_unknown();
    check("/events/stop_threshold_frames", c.events.stop_threshold_frames >= 1,
          "must be >= 1");
    check("/events/park_threshold_frames",
          c.events.park_threshold_frames > c.events.stop_threshold_frames,
          "must exceed stop_threshold_frames");
  }

  auto& s = c.single;
  s.gmm = gmm;
  s.tracker = tracker;
  s.blobs = blobs;
  s.stop_threshold_frames = c.events.stop_threshold_frames;
  if (root.has("single")) {
    auto o = root.object("single");
    s.rate.alpha = o.get_or("alpha", s.rate.alpha);
    s.rate.update_stride = o.get_or("stride", s.rate.update_stride);
    s.tau = o.get_or("tau", s.tau);
    s.tau_motion = o.get_or("tau_motion", s.tau_motion);
    s.guard_radius = o.get_or("guard_radius", s.guard_radius);
    o.reject_unknown();
    check("/single/alpha", s.rate.alpha >= 0.0 && s.rate.alpha <= 1.0,
          "must be in [0, 1]");
    check("/single/stride", s.rate.update_stride >= 1, "must be >= 1");
    check("/single/tau", s.tau >= 0 && s.tau <= 255, "must be in [0, 255]");
    check("/single/tau_motion", s.tau_motion >= 0 && s.tau_motion <= 255,
          "must be in [0, 255]");
    check("/single/guard_radius", s.guard_radius >= 0, "must be >= 0");
  }

  auto& d = c.dual;
  d.gmm = gmm;
  d.tracker = tracker;
  d.blobs = blobs;
  if (root.has("dual")) {
    auto o = root.object("dual");
    d.fast.alpha = o.get_or("alpha_fast", d.fast.alpha);
    d.slow.alpha = o.get_or("alpha_slow", d.slow.alpha);
    d.fast.update_stride = o.get_or("stride_fast", d.fast.update_stride);
    d.slow.update_stride = o.get_or("stride_slow", d.slow.update_stride);
    d.tau = o.get_or("tau", d.tau);
    d.confirm_frames = o.get_or("confirm_frames", d.confirm_frames);
    o.reject_unknown();
    check("/dual/alpha_fast", d.fast.alpha >= 0.0 && d.fast.alpha <= 1.0,
          "must be in [0, 1]");
    check("/dual/alpha_slow", d.slow.alpha >= 0.0 && d.slow.alpha <= 1.0,
          "must be in [0, 1]");
    check("/dual/stride_fast", d.fast.update_stride >= 1, "must be >= 1");
    check("/dual/stride_slow", d.slow.update_stride >= 1, "must be >= 1");
    check("/dual/tau", d.tau >= 0 && d.tau <= 255, "must be in [0, 255]");
    check("/dual/confirm_frames", d.confirm_frames >= 1, "must be >= 1");
  }
  {
    const bool faster_rate = d.fast.alpha > d.slow.alpha &&
                             d.fast.update_stride <= d.slow.update_stride;
    const bool faster_stride = d.fast.alpha >= d.slow.alpha &&
                               d.fast.update_stride < d.slow.update_stride;
    check("/dual/alpha_slow", faster_rate || faster_stride,
          "slow model must adapt slower than the fast one "
          "(alpha_slow < alpha_fast, or stride_slow > stride_fast)");
  }

  if (root.has("monitor")) {
    auto m = root.object("monitor");
    auto& p = c.monitor;
    p.ncc_threshold = m.get_or("ncc_threshold", p.ncc_threshold);
    p.halo = m.get_or("halo", p.halo);
    p.occlusion_fraction = m.get_or("occlusion_fraction", p.occlusion_fraction);
    p.refresh_interval_s = m.get_or("refresh_interval_s", p.refresh_interval_s);
    p.refresh_min_ncc = m.get_or("refresh_min_ncc", p.refresh_min_ncc);
    p.refresh_enabled = m.get_or("refresh_enabled", p.refresh_enabled);
    m.reject_unknown();
    check("/monitor/ncc_threshold",
          p.ncc_threshold >= -1.0 && p.ncc_threshold <= 1.0,
          "must be in [-1, 1]");
    check("/monitor/halo", p.halo >= 0, "must be >= 0");
    check("/monitor/occlusion_fraction", p.occlusion_fraction >= 0.0,
          "must be >= 0");
    check("/monitor/refresh_interval_s", p.refresh_interval_s > 0.0,
          "must be positive");
    check("/monitor/refresh_min_ncc",
          p.refresh_min_ncc >= -1.0 && p.refresh_min_ncc <= 1.0,
          "must be in [-1, 1]");
  }

  if (root.has("output")) {
    auto o = root.object("output");
    c.output.events = o.get_or<std::string>("events", c.output.events);
    if (o.has("summary_csv") && !o.raw("summary_csv").is_null())
      c.output.summary_csv = o.get<std::string>("summary_csv");
    if (o.has("mask_dump_dir") && !o.raw("mask_dump_dir").is_null())
      c.output.mask_dump_dir = o.get<std::string>("mask_dump_dir");
    o.reject_unknown();
  }

  root.reject_unknown();
  return c;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline RunConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {}) {
  auto doc = read_json_file(path);
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

}  // namespace parkwatch
