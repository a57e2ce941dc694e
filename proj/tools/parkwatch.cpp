// parkwatch: run a stationary-object pipeline, benchmark the two detectors,
// or render a synthetic scene.
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "parkwatch/parkwatch.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kIoError = 3;

template <typename F>
int guarded(F&& body) {
  try {
    body();
    return kOk;
  } catch (const parkwatch::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const parkwatch::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const parkwatch::DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stationary object and illegal parking detection"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;

  auto* run = app.add_subcommand("run", "Run a pipeline over a frame source");
  run->add_option("-c,--config", config_path, "JSON run configuration")
      ->required();
  run->add_option("--set", overrides, "Override a config key: dotted.key=value");
  bool quiet = false;
  run->add_flag("-q,--quiet", quiet, "Do not print the summary table");

  auto* bench = app.add_subcommand("bench", "Measure pipeline throughput");
  int repetitions = 5;
  std::string bench_csv;
  bench->add_option("-c,--config", config_path, "JSON run configuration")
      ->required();
  bench->add_option("--set", overrides, "Override a config key: dotted.key=value");
  bench->add_option("-r,--repetitions", repetitions, "Runs per measurement")
      ->check(CLI::PositiveNumber);
  bench->add_option("--csv", bench_csv, "Also write the report to this file");

  auto* synth = app.add_subcommand("synth", "Render a synthetic scene script");
  std::string script_path, out_dir;
  bool overwrite = false;
  synth->add_option("script", script_path, "Scene script (JSON)")->required();
  synth->add_option("output", out_dir, "Output frame directory")->required();
  synth->add_flag("--overwrite", overwrite, "Replace an existing output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (*run) {
    return guarded([&] {
      const auto config = parkwatch::load_config(config_path, overrides);
      const auto result = parkwatch::run(config);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      if (!quiet) result.summary.write_table(std::cout);
    });
  }
  if (*bench) {
    return guarded([&] {
      const auto config = parkwatch::load_config(config_path, overrides);
      const auto rows = parkwatch::bench(config, repetitions);
      parkwatch::write_bench_csv(std::cout, rows);
      if (!bench_csv.empty()) {
        std::ofstream out(bench_csv);
        if (!out) throw parkwatch::IoError(bench_csv + ": cannot open");
        parkwatch::write_bench_csv(out, rows);
      }
    });
  }
  return guarded([&] {
    const auto script = parkwatch::synth::load_script(script_path);
    parkwatch::synth::render_to_disk(script, out_dir, overwrite);
    std::cout << "wrote " << script.frames << " frames to " << out_dir << '\n';
  });
}
