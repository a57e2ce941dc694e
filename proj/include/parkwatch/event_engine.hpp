#pragma once

// Incident lifecycle: tracking -> stopped -> parked -> moved.
//
// A candidate's static duration is measured in frames from its first
// detection. Reaching the stop threshold emits `stopped`; reaching the park
// threshold emits `parked` and hands the object to NCC monitoring, after
// which only monitor outcomes move it on. A stopped object that disappears
// before parking is closed as stopped-not-parked.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "parkwatch/core.hpp"
#include "parkwatch/ncc_monitor.hpp"
#include "parkwatch/tracking.hpp"

namespace parkwatch {

enum class Stage { Tracking, Stopped, Parked, Moved };

inline const char* to_string(Stage s) noexcept {
  switch (s) {
    case Stage::Tracking: return "tracking";
    case Stage::Stopped: return "stopped";
    case Stage::Parked: return "parked";
    case Stage::Moved: return "moved";
  }
  return "?";
}

enum class EventType { Stopped, Parked, Moved, PostponedCheck };

inline const char* to_string(EventType t) noexcept {
  switch (t) {
    case EventType::Stopped: return "stopped";
    case EventType::Parked: return "parked";
    case EventType::Moved: return "moved";
    case EventType::PostponedCheck: return "postponed_check";
  }
  return "?";
}

struct IncidentEvent {
  EventType type = EventType::Stopped;
  int object_id = 0;
  std::int64_t frame_index = 0;
  double timestamp_s = 0.0;
  Rect bbox;
  std::optional<double> gamma;
  double duration_s = 0.0;

  friend bool operator==(const IncidentEvent&, const IncidentEvent&) = default;
};

/// One JSON object, fields in log order.
inline nlohmann::ordered_json event_json(std::string_view event_type,
                                         int object_id,
                                         std::int64_t frame_index,
                                         double timestamp_s, const Rect& bbox,
                                         std::optional<double> gamma,
                                         double duration_s) {
  nlohmann::ordered_json j;
  j["event_type"] = event_type;
  j["object_id"] = object_id;
  j["frame_index"] = frame_index;
  j["timestamp_s"] = timestamp_s;
  j["bbox"] = {bbox.x, bbox.y, bbox.w, bbox.h};
  j["gamma"] = gamma ? nlohmann::ordered_json(*gamma) : nullptr;
  j["duration_s"] = duration_s;
  return j;
}

inline std::string to_json_line(const IncidentEvent& e) {
  return event_json(to_string(e.type), e.object_id, e.frame_index,
                    e.timestamp_s, e.bbox, e.gamma, e.duration_s)
      .dump();
}

/// Parsed log line; event_type kept as text so ground-truth logs (which use
/// a different vocabulary) share the reader.
struct LogRecord {
  std::string event_type;
  int object_id = 0;
  std::int64_t frame_index = 0;
  double timestamp_s = 0.0;
  Rect bbox;
  std::optional<double> gamma;
  double duration_s = 0.0;
};

inline LogRecord parse_log_line(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  LogRecord r;
  r.event_type = j.at("event_type").get<std::string>();
  r.object_id = j.at("object_id").get<int>();
  r.frame_index = j.at("frame_index").get<std::int64_t>();
  r.timestamp_s = j.at("timestamp_s").get<double>();
  const auto& b = j.at("bbox");
  r.bbox = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(),
            b.at(3).get<int>()};
  if (!j.at("gamma").is_null()) r.gamma = j.at("gamma").get<double>();
  r.duration_s = j.at("duration_s").get<double>();
  return r;
}

struct EventParams {
  int stop_threshold_frames = 50;
  int park_threshold_frames = 150;

  void validate() const {
    if (stop_threshold_frames < 1)
      throw ConfigError("events.stop_threshold_frames must be >= 1");
    if (park_threshold_frames <= stop_threshold_frames)
      throw ConfigError(
          "events.park_threshold_frames must exceed stop_threshold_frames");
  }
};

struct IncidentState {
  int object_id = 0;
  Stage stage = Stage::Tracking;
  std::int64_t stop_start_frame = 0;
  std::int64_t total_stopped_frames = 0;
  std::int64_t last_frame = 0;
  Rect bbox;
  bool reached_parked = false;
  bool closed = false;
};

struct SummaryRow {
  int object_id = 0;
  Stage stage = Stage::Stopped;
  std::int64_t stop_start_frame = 0;
  std::int64_t end_frame = 0;
  double duration_s = 0.0;
};

struct Summary {
  std::vector<SummaryRow> rows;  // by object id
  std::optional<double> max_parking_minutes;

  /// "4.13" style, or empty when nothing parked.
  std::string max_parking_text() const {
    if (!max_parking_minutes) return {};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *max_parking_minutes);
    return buf;
  }

  void write_table(std::ostream& os) const {
    char line[128];
    os << " object | stage   | start frame | end frame | duration (s)\n";
    os << "--------+---------+-------------+-----------+-------------\n";
    for (const auto& r : rows) {
      std::snprintf(line, sizeof line, " %6d | %-7s | %11lld | %9lld | %12.2f\n",
                    r.object_id, to_string(r.stage),
                    static_cast<long long>(r.stop_start_frame),
                    static_cast<long long>(r.end_frame), r.duration_s);
      os << line;
    }
    if (max_parking_minutes)
      os << "maximum parking time: " << max_parking_text() << " minutes\n";
    else
      os << "maximum parking time: none\n";
  }

  void write_csv(std::ostream& os) const {
    os << "object_id,stage,stop_start_frame,end_frame,duration_s\n";
    char line[128];
    for (const auto& r : rows) {
      std::snprintf(line, sizeof line, "%d,%s,%lld,%lld,%.3f\n", r.object_id,
                    to_string(r.stage),
                    static_cast<long long>(r.stop_start_frame),
                    static_cast<long long>(r.end_frame), r.duration_s);
      os << line;
    }
  }
};

class EventEngine {
 public:
  EventEngine(EventParams params, double fps) : params_(params), fps_(fps) {
    params_.validate();
    if (!(fps > 0.0)) throw ConfigError("fps must be positive");
  }

  std::vector<IncidentEvent> advance(
      std::int64_t frame_index, std::span<const TrackedObject> candidates,
      std::span<const MonitorOutcome> outcomes) {
    if (last_frame_ && frame_index < *last_frame_)
      throw std::logic_error("event engine: frame index went backwards");
    last_frame_ = frame_index;
    std::vector<IncidentEvent> events;

    for (const auto& o : outcomes) {
      auto it = incidents_.find(o.object_id);
      if (it == incidents_.end() || it->second.stage != Stage::Parked)
        throw std::invalid_argument("event engine: unknown object_id " +
                                    std::to_string(o.object_id) +
                                    " in monitor outcome");
      auto& s = it->second;
      s.last_frame = frame_index;
      s.total_stopped_frames = frame_index - s.stop_start_frame;
      if (o.verdict == MonitorVerdict::Postponed) {
        events.push_back(make(EventType::PostponedCheck, s, frame_index,
                              std::nullopt));
      } else if (o.verdict == MonitorVerdict::Moved) {
        s.stage = Stage::Moved;
        s.closed = true;
        events.push_back(make(EventType::Moved, s, frame_index, o.gamma));
      }
    }

    std::vector<int> seen;
    seen.reserve(candidates.size());
    for (const auto& c : candidates) {
      seen.push_back(c.id);
      auto [it, fresh] = incidents_.try_emplace(c.id);
      auto& s = it->second;
      if (fresh) {
        s.object_id = c.id;
        s.stop_start_frame = c.first_seen_frame;
      }
      if (s.stage == Stage::Parked || s.stage == Stage::Moved || s.closed)
        continue;
      s.bbox = c.bbox;
      s.last_frame = frame_index;
      s.total_stopped_frames = frame_index - s.stop_start_frame;
      if (s.stage == Stage::Tracking &&
          s.total_stopped_frames >= params_.stop_threshold_frames) {
        s.stage = Stage::Stopped;
        events.push_back(make(EventType::Stopped, s, frame_index, std::nullopt));
      }
      if (s.stage == Stage::Stopped &&
          s.total_stopped_frames >= params_.park_threshold_frames) {
        s.stage = Stage::Parked;
        s.reached_parked = true;
        events.push_back(make(EventType::Parked, s, frame_index, std::nullopt));
      }
    }

    // Candidates that vanished before parking.
    for (auto it = incidents_.begin(); it != incidents_.end();) {
      auto& s = it->second;
      const bool present =
          std::find(seen.begin(), seen.end(), s.object_id) != seen.end();
      if (!present && !s.closed && s.stage == Stage::Tracking) {
        it = incidents_.erase(it);
        continue;
      }
      if (!present && !s.closed && s.stage == Stage::Stopped) s.closed = true;
      ++it;
    }
    return events;
  }

  /// Closes the run at `frame_index`: open incidents accrue duration up to it.
  void finish(std::int64_t frame_index) {
    for (auto& [id, s] : incidents_)
      if (!s.closed && s.stage == Stage::Parked)
        s.total_stopped_frames = frame_index - s.stop_start_frame;
  }

  Summary report() const {
    Summary out;
    for (const auto& [id, s] : incidents_) {
      if (s.stage == Stage::Tracking) continue;
      const auto frames = s.total_stopped_frames;
      out.rows.push_back({id, s.stage, s.stop_start_frame,
                          s.stop_start_frame + frames, seconds(frames)});
      if (s.reached_parked) {
        const double minutes = seconds(frames) / 60.0;
        if (!out.max_parking_minutes || minutes > *out.max_parking_minutes)
          out.max_parking_minutes = minutes;
      }
    }
    return out;
  }

  const std::map<int, IncidentState>& incidents() const noexcept {
    return incidents_;
  }
  double fps() const noexcept { return fps_; }

 private:
  double seconds(std::int64_t frames) const noexcept {
    return static_cast<double>(frames) / fps_;
  }

  IncidentEvent make(EventType t, const IncidentState& s,
                     std::int64_t frame_index, std::optional<double> gamma) const {
    return {t,        s.object_id, frame_index, seconds(frame_index),
            s.bbox,   gamma,       seconds(frame_index - s.stop_start_frame)};
  }

  EventParams params_;
  double fps_;
  std::map<int, IncidentState> incidents_;
  std::optional<std::int64_t> last_frame_;
};

}  // namespace parkwatch
