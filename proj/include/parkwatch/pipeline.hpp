#pragma once

// Frame-by-frame driver: detector -> NCC monitor -> event engine, plus the
// file-level `run` entry point and the throughput benchmark.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "parkwatch/config.hpp"
#include "parkwatch/dual_bg_detector.hpp"
#include "parkwatch/event_engine.hpp"
#include "parkwatch/frame_io.hpp"
#include "parkwatch/ncc_monitor.hpp"
#include "parkwatch/single_bg_detector.hpp"

namespace parkwatch {

struct PipelineParams {
  PipelineKind kind = PipelineKind::Single;
  double fps = 30.0;
  SingleDetectorParams single;
  DualDetectorParams dual;
  MonitorParams monitor;
  EventParams events;
  /// Border added around a monitored object's box when masking it out of
  /// detection and when re-seeding the background after it leaves.
  int suppression_margin = 2;

  static PipelineParams from(const RunConfig& c) {
    PipelineParams p;
    p.kind = c.pipeline;
    p.fps = c.fps;
    p.single = c.single;
    p.dual = c.dual;
    p.monitor = c.monitor;
    p.events = c.events;
    return p;
  }
};

inline std::unique_ptr<StationaryDetector> make_detector(
    const PipelineParams& p, int width, int height) {
  if (p.kind == PipelineKind::Single)
    return std::make_unique<SingleBackgroundDetector>(width, height, p.single);
  return std::make_unique<DualBackgroundDetector>(width, height, p.dual);
}

class Pipeline {
 public:
  Pipeline(const PipelineParams& params, int width, int height)
      : params_(params),
        detector_(make_detector(params, width, height)),
        monitor_(params.monitor),
        engine_(params.events, params.fps) {}

  /// Processes one ROI frame and returns the events it produced.
  std::vector<IncidentEvent> process(const GrayFrame& frame) {
    const auto candidates = detector_->step(frame);

    std::vector<MonitorOutcome> outcomes;
    if (!monitor_.references().empty()) {
      const auto motion = frame_difference(frame, prev_ ? *prev_ : frame,
                                           params_.single.tau_motion);
      outcomes = monitor_.step(frame, motion, params_.fps);
    }
    auto events = engine_.advance(frame.frame_index, candidates, outcomes);

    bool regions_changed = false;
    for (const auto& e : events) {
      if (e.type == EventType::Parked) {
        try {
          monitor_.add(register_reference(frame, {e.object_id, e.bbox}));
        } catch (const std::invalid_argument& err) {
          warnings_.push_back("frame " + std::to_string(frame.frame_index) +
                              ": object " + std::to_string(e.object_id) +
                              " not monitored: " + err.what());
        }
        monitored_.emplace_back(e.object_id,
                                e.bbox.expanded(params_.suppression_margin));
        regions_changed = true;
      } else if (e.type == EventType::Moved) {
        monitor_.remove(e.object_id);
        const auto region = e.bbox.expanded(params_.suppression_margin);
        detector_->reset_region(frame, region);
        std::erase_if(monitored_,
                      [&](const auto& m) { return m.first == e.object_id; });
        regions_changed = true;
      }
    }
    if (regions_changed) {
      std::vector<Rect> regions;
      for (const auto& m : monitored_) regions.push_back(m.second);
      detector_->set_suppressed(std::move(regions));
    }
    prev_ = frame;
    last_frame_ = frame.frame_index;
    return events;
  }

  Summary finish() {
    engine_.finish(last_frame_);
    return engine_.report();
  }

  const NccMonitor& monitor() const noexcept { return monitor_; }
  const EventEngine& engine() const noexcept { return engine_; }
  const StationaryDetector& detector() const noexcept { return *detector_; }
  const std::vector<std::string>& warnings() const noexcept {
    return warnings_;
  }

 private:
  PipelineParams params_;
  std::unique_ptr<StationaryDetector> detector_;
  NccMonitor monitor_;
  EventEngine engine_;
  std::optional<GrayFrame> prev_;
  std::vector<std::pair<int, Rect>> monitored_;
  std::vector<std::string> warnings_;
  std::int64_t last_frame_ = 0;
};

struct RunResult {
  std::vector<IncidentEvent> events;
  Summary summary;
  std::vector<std::string> warnings;
};

/// Runs a pipeline over in-memory frames (ROI already applied).
inline RunResult run_frames(const PipelineParams& params,
                            const std::vector<GrayFrame>& frames) {
  RunResult out;
  if (frames.empty()) return out;
  Pipeline p(params, frames.front().width(), frames.front().height());
  for (const auto& f : frames) {
    auto ev = p.process(f);
    out.events.insert(out.events.end(), ev.begin(), ev.end());
  }
  out.summary = p.finish();
  out.warnings = p.warnings();
  return out;
}

inline FrameSource open_source(const RunConfig& c) {
  return c.input.raw ? FrameSource::open_raw(c.input.path, c.input.width,
                                             c.input.height, c.fps)
                     : FrameSource::open_directory(c.input.path, c.fps);
}

/// Full file-level run: streams frames from the configured source and writes
/// the event log (and optional CSV summary). Returns the collected result.
inline RunResult run(const RunConfig& config) {
  auto source = open_source(config);
  if (!config.roi.empty())
    config.roi.validate(source.width(), source.height());
  const int w = config.roi.empty() ? source.width() : config.roi.output_width();
  const int h =
      config.roi.empty() ? source.height() : config.roi.output_height();

  std::ofstream log(config.output.events, std::ios::binary);
  if (!log) throw IoError(config.output.events + ": cannot open for writing");
  if (config.output.mask_dump_dir)
    std::filesystem::create_directories(*config.output.mask_dump_dir);

  RunResult out;
  Pipeline pipeline(PipelineParams::from(config), w, h);
  char name[32];
  while (auto frame = source.next()) {
    const auto roi = config.roi.empty() ? std::move(*frame)
                                        : extract_roi(*frame, config.roi);
    for (auto& e : pipeline.process(roi)) {
      log << to_json_line(e) << '\n';
      out.events.push_back(e);
    }
    if (config.output.mask_dump_dir) {
      std::snprintf(name, sizeof name, "mask_%06lld.pgm",
                    static_cast<long long>(roi.frame_index));
      write_pgm(std::filesystem::path(*config.output.mask_dump_dir) / name,
                pipeline.detector().last_mask().to_image());
    }
  }
  if (!log) throw IoError(config.output.events + ": write failed");
  out.summary = pipeline.finish();
  out.warnings = pipeline.warnings();
  if (config.output.summary_csv) {
    std::ofstream csv(*config.output.summary_csv);
    if (!csv)
      throw IoError(*config.output.summary_csv + ": cannot open for writing");
    out.summary.write_csv(csv);
  }
  return out;
}

// ----------------------------------------------------------------------------
// Benchmark
// ----------------------------------------------------------------------------

enum class BenchPipeline { Noop, Single, Dual };

inline const char* to_string(BenchPipeline b) noexcept {
  switch (b) {
    case BenchPipeline::Noop: return "noop";
    case BenchPipeline::Single: return "single";
    case BenchPipeline::Dual: return "dual";
  }
  return "?";
}

struct BenchRow {
  BenchPipeline pipeline = BenchPipeline::Single;
  int roi_w = 0;
  int roi_h = 0;
  double fps = 0.0;  // median over repetitions
};

/// Wall-clock frames/second of one full pass over preloaded frames.
inline double measure_fps(BenchPipeline kind, PipelineParams params,
                          const std::vector<GrayFrame>& frames) {
  using clock = std::chrono::steady_clock;
  if (frames.empty()) return 0.0;
  const auto t0 = clock::now();
  if (kind == BenchPipeline::Noop) {
    // Touches every frame so the loop cannot be elided.
    volatile std::uint64_t sink = 0;
    for (const auto& f : frames) sink = sink + f.image.pixels()[0];
  } else {
    params.kind =
        kind == BenchPipeline::Single ? PipelineKind::Single : PipelineKind::Dual;
    Pipeline p(params, frames.front().width(), frames.front().height());
    for (const auto& f : frames) p.process(f);
  }
  const std::chrono::duration<double> dt = clock::now() - t0;
  const double secs = std::max(dt.count(), 1e-9);
  return static_cast<double>(frames.size()) / secs;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Crops the top-left quarter (half width, half height) of every frame.
inline std::vector<GrayFrame> quarter(const std::vector<GrayFrame>& frames) {
  std::vector<GrayFrame> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    const Rect r{0, 0, std::max(1, f.width() / 2), std::max(1, f.height() / 2)};
    out.push_back({f.image.crop(r), f.frame_index, f.timestamp_s});
  }
  return out;
}

/// Rows for {noop, single, dual} x {full ROI, quartered ROI}.
inline std::vector<BenchRow> bench_frames(const PipelineParams& params,
                                          const std::vector<GrayFrame>& frames,
                                          int repetitions) {
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  std::vector<BenchRow> rows;
  if (frames.empty()) return rows;
  const std::vector<GrayFrame>* sizes[2] = {&frames, nullptr};
  const auto quartered = quarter(frames);
  sizes[1] = &quartered;
  for (const auto* set : sizes)
    for (auto kind :
         {BenchPipeline::Noop, BenchPipeline::Single, BenchPipeline::Dual}) {
      std::vector<double> samples;
      for (int r = 0; r < repetitions; ++r)
        samples.push_back(measure_fps(kind, params, *set));
      rows.push_back({kind, set->front().width(), set->front().height(),
                      median(samples)});
    }
  return rows;
}

inline std::vector<BenchRow> bench(const RunConfig& config, int repetitions) {
  auto source = open_source(config);
  auto frames = load_all(source);
  if (!config.roi.empty())
    for (auto& f : frames) f = extract_roi(f, config.roi);
  return bench_frames(PipelineParams::from(config), frames, repetitions);
}

inline void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "pipeline,roi_w,roi_h,fps\n";
  char line[96];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%s,%d,%d,%.2f\n", to_string(r.pipeline),
                  r.roi_w, r.roi_h, r.fps);
    os << line;
  }
}

}  // namespace parkwatch
