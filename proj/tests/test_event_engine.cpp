#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "parkwatch/event_engine.hpp"

using namespace parkwatch;

namespace {

TrackedObject cand(int id, std::int64_t first_seen, std::int64_t frame,
                   Rect bbox = {10, 10, 40, 20}) {
  TrackedObject o;
  o.id = id;
  o.bbox = bbox;
  o.first_seen_frame = first_seen;
  o.last_seen_frame = frame;
  o.consecutive_frames = static_cast<int>(frame - first_seen + 1);
  return o;
}

struct Driver {
  EventEngine engine{EventParams{}, 30.0};
  std::vector<IncidentEvent> log;

  void frame(std::int64_t f, std::vector<TrackedObject> c,
             std::vector<MonitorOutcome> m = {}) {
    for (auto& e : engine.advance(f, c, m)) log.push_back(e);
  }
};

}  // namespace

TEST(EventEngine, StoppedThenParked) {
  Driver d;
  for (std::int64_t f = 0; f <= 400; ++f) {
    std::vector<TrackedObject> c;
    if (f >= 149) c.push_back(cand(1, 100, f));
    std::vector<MonitorOutcome> m;
    if (d.engine.incidents().contains(1) &&
        d.engine.incidents().at(1).stage == Stage::Parked)
      m.push_back({1, MonitorVerdict::Present, 0.99});
    d.frame(f, c, m);
  }
  ASSERT_EQ(d.log.size(), 2u);
  EXPECT_EQ(d.log[0].type, EventType::Stopped);
  EXPECT_EQ(d.log[0].frame_index, 150);
  EXPECT_DOUBLE_EQ(d.log[0].timestamp_s, 5.0);
  EXPECT_NEAR(d.log[0].duration_s, 50.0 / 30.0, 1e-12);
  EXPECT_EQ(d.log[1].type, EventType::Parked);
  EXPECT_EQ(d.log[1].frame_index, 250);
  EXPECT_FALSE(d.log[1].gamma);
  d.engine.finish(400);
  const auto s = d.engine.report();
  ASSERT_EQ(s.rows.size(), 1u);
  EXPECT_EQ(s.rows[0].stage, Stage::Parked);
  EXPECT_DOUBLE_EQ(s.rows[0].duration_s, 10.0);
  EXPECT_EQ(s.max_parking_text(), "0.17");
}

TEST(EventEngine, VanishedBeforeParkingStaysStopped) {
  Driver d;
  for (std::int64_t f = 0; f <= 400; ++f) {
    std::vector<TrackedObject> c;
    if (f >= 149 && f <= 240) c.push_back(cand(1, 100, f));
    d.frame(f, c);
  }
  ASSERT_EQ(d.log.size(), 1u);
  EXPECT_EQ(d.log[0].type, EventType::Stopped);
  const auto s = d.engine.report();
  ASSERT_EQ(s.rows.size(), 1u);
  EXPECT_EQ(s.rows[0].stage, Stage::Stopped);
  EXPECT_EQ(s.rows[0].end_frame, 240);
  EXPECT_FALSE(s.max_parking_minutes);
  EXPECT_EQ(s.max_parking_text(), "");
}

TEST(EventEngine, MaximumParkingTimeInMinutes) {
  Driver d;
  d.frame(0, {});
  d.frame(150, {cand(1, 0, 150)});
  ASSERT_EQ(d.log.size(), 2u);  // stopped and parked on the same frame
  d.frame(7440, {}, {{1, MonitorVerdict::Moved, 0.1}});
  ASSERT_EQ(d.log.size(), 3u);
  EXPECT_EQ(d.log[2].type, EventType::Moved);
  EXPECT_DOUBLE_EQ(*d.log[2].gamma, 0.1);
  EXPECT_DOUBLE_EQ(d.log[2].duration_s, 248.0);
  EXPECT_EQ(d.engine.report().max_parking_text(), "4.13");
}

TEST(EventEngine, PostponedCheckEvent) {
  Driver d;
  d.frame(150, {cand(4, 0, 150)});
  d.frame(151, {}, {{4, MonitorVerdict::Postponed, std::nullopt}});
  d.frame(152, {}, {{4, MonitorVerdict::Present, 0.95}});
  ASSERT_EQ(d.log.size(), 3u);
  EXPECT_EQ(d.log[2].type, EventType::PostponedCheck);
  EXPECT_EQ(d.engine.incidents().at(4).stage, Stage::Parked);
}

TEST(EventEngine, EmptyRun) {
  Driver d;
  for (std::int64_t f = 0; f < 100; ++f) d.frame(f, {});
  d.engine.finish(99);
  const auto s = d.engine.report();
  EXPECT_TRUE(s.rows.empty());
  EXPECT_FALSE(s.max_parking_minutes);
  std::ostringstream os;
  s.write_csv(os);
  EXPECT_EQ(os.str(), "object_id,stage,stop_start_frame,end_frame,duration_s\n");
}

TEST(EventEngine, RowsOrderedById) {
  Driver d;
  d.frame(200, {cand(7, 100, 200), cand(3, 120, 200), cand(5, 190, 200)});
  const auto s = d.engine.report();
  ASSERT_EQ(s.rows.size(), 2u);  // id 5 has not reached the stop threshold
  EXPECT_EQ(s.rows[0].object_id, 3);
  EXPECT_EQ(s.rows[1].object_id, 7);
}

TEST(EventEngine, RejectsUnknownIdAndBackwardsFrames) {
  Driver d;
  d.frame(10, {});
  EXPECT_THROW(d.frame(11, {}, {{42, MonitorVerdict::Present, 1.0}}),
               std::invalid_argument);
  EXPECT_THROW(d.frame(5, {}), std::logic_error);
}

TEST(EventEngine, DurationRecomputedFromFrames) {
  Driver d;
  std::mt19937 rng(1);
  for (std::int64_t f = 0; f < 2000; ++f) {
    std::vector<TrackedObject> c;
    for (int id = 1; id <= 5; ++id)
      if (f >= id * 100 + 49 && f < id * 100 + 49 + static_cast<int>(rng() % 400))
        c.push_back(cand(id, id * 100, f));
    std::vector<MonitorOutcome> m;
    for (const auto& [id, s] : d.engine.incidents())
      if (s.stage == Stage::Parked)
        m.push_back({id, rng() % 50 ? MonitorVerdict::Present : MonitorVerdict::Moved, 0.5});
    d.frame(f, c, m);
  }
  for (const auto& e : d.log) {
    const auto& s = d.engine.incidents().at(e.object_id);
    EXPECT_NEAR(e.duration_s, (e.frame_index - s.stop_start_frame) / 30.0, 1e-9);
    EXPECT_NEAR(e.timestamp_s, e.frame_index / 30.0, 1e-9);
  }
}

// Stages only move forward: tracking < stopped < parked < moved.
TEST(EventEngine, StagesAreMonotone) {
  Driver d;
  std::mt19937 rng(2);
  std::map<int, int> last;
  for (std::int64_t f = 0; f < 3000; ++f) {
    std::vector<TrackedObject> c;
    for (int id = 1; id <= 8; ++id)
      if (rng() % 10) c.push_back(cand(id, id * 50, f));
    std::vector<MonitorOutcome> m;
    for (const auto& [id, s] : d.engine.incidents())
      if (s.stage == Stage::Parked && !s.closed) {
        const auto r = rng() % 100;
        m.push_back({id,
                     r < 2    ? MonitorVerdict::Moved
                     : r < 20 ? MonitorVerdict::Postponed
                              : MonitorVerdict::Present,
                     0.5});
      }
    d.frame(f, c, m);
    for (const auto& [id, s] : d.engine.incidents()) {
      const int stage = static_cast<int>(s.stage);
      EXPECT_GE(stage, last[id]);
      last[id] = stage;
    }
  }
}

TEST(EventLog, FieldOrderAndRoundTrip) {
  IncidentEvent e{EventType::Moved, 3, 810, 27.0, {100, 50, 40, 20}, 0.25, 12.5};
  const auto line = to_json_line(e);
  EXPECT_EQ(line,
            R"({"event_type":"moved","object_id":3,"frame_index":810,"timestamp_s":27.0,)"
            R"("bbox":[100,50,40,20],"gamma":0.25,"duration_s":12.5})");
  const auto r = parse_log_line(line);
  EXPECT_EQ(r.event_type, "moved");
  EXPECT_EQ(r.bbox, e.bbox);
  EXPECT_EQ(r.gamma, e.gamma);
  e.type = EventType::Stopped;
  e.gamma.reset();
  EXPECT_NE(to_json_line(e).find(R"("gamma":null)"), std::string::npos);
}

TEST(EventParams, Validation) {
  EXPECT_THROW((EventEngine{EventParams{50, 50}, 30.0}), ConfigError);
  EXPECT_THROW((EventEngine{EventParams{}, 0.0}), ConfigError);
}
