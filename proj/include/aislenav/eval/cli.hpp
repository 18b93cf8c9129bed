#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "aislenav/eval/report.hpp"
#include "aislenav/pgm.hpp"
#include "aislenav/simworld/fixtures.hpp"
#include "aislenav/simworld/scenario.hpp"

namespace aislenav::eval {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitRuntime = 2 };

namespace detail {

struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline sim::ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeFailure("cannot open config file '" + path + "'");
  try {
    return sim::parse_scenario(in);
  } catch (const sim::ConfigError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

inline sim::NavMode parse_mode(const std::string& name) {
  try {
    return sim::parse_nav_mode(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw RuntimeFailure("cannot write '" + p.string() + "'");
  return os;
}

inline void write_debug(const std::filesystem::path& dir, int step, const GrayImage& frame,
                        const vision::VisionTrace& tr) {
  char stem[32];
  std::snprintf(stem, sizeof stem, "step%05d_", step);
  write_pgm(dir / (std::string(stem) + "frame.pgm"), frame);
  if (!tr.edges.empty()) write_pgm(dir / (std::string(stem) + "edges.pgm"), tr.edges);
  if (!tr.birds_eye.empty()) write_pgm(dir / (std::string(stem) + "birds_eye.pgm"), tr.birds_eye);
  if (!tr.mask.empty()) write_pgm(dir / (std::string(stem) + "mask.pgm"), tr.mask);
}

inline std::vector<sim::NavMode> parse_modes(const std::string& list) {
  std::vector<sim::NavMode> modes;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const sim::NavMode m = parse_mode(item);
    if (std::find(modes.begin(), modes.end(), m) != modes.end()) throw UsageError("mode '" + item + "' listed twice");
    modes.push_back(m);
  }
  if (modes.empty()) throw UsageError("no modes given");
  return modes;
}

}  // namespace detail

/// Entry point of the `aislenav` tool. Output streams are parameters so the
/// commands can be driven from tests.
inline int cli_run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Composite visual-laser aisle navigation: scenario runner and evaluation", "aislenav"};
  app.require_subcommand(1);

  std::string config, csv_path, summary_path, debug_dir, mode_name, modes_list = "fused,vision,laser";
  std::uint64_t seed = 0;
  int debug_every = 10;

  auto* run = app.add_subcommand("run", "Run one scenario and write its trajectory as CSV");
  run->add_option("config", config, "Scenario file")->required();
  run->add_option("--csv", csv_path, "Trajectory CSV output (default: standard output)");
  run->add_option("--summary", summary_path, "Metrics summary output");
  run->add_option("--debug-dir", debug_dir, "Directory for per-step PGM images of the vision pipeline");
  run->add_option("--debug-every", debug_every, "Write debug images every N steps")->check(CLI::PositiveNumber);
  run->add_option("--mode", mode_name, "Override the navigation mode (fused, vision, laser)");
  auto* run_seed = run->add_option("--seed", seed, "Override the scenario seed");

  auto* cmp = app.add_subcommand("compare", "Run the same scenario and seed in several modes and tabulate");
  cmp->add_option("config", config, "Scenario file")->required();
  cmp->add_option("--modes", modes_list, "Comma-separated modes")->capture_default_str();
  auto* cmp_seed = cmp->add_option("--seed", seed, "Override the scenario seed");

  std::string fixture_dir = "tests/fixtures";
  auto* fix = app.add_subcommand("fixtures", "Regenerate the golden test frames");
  fix->add_option("dir", fixture_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  const auto build = [](const sim::ScenarioConfig& cfg, const std::string& path) {
    try {
      return sim::build_world(cfg);
    } catch (const sim::ConfigError& e) {
      throw detail::UsageError(path + ": " + e.what());
    }
  };

  try {
    if (*run) {
      sim::ScenarioConfig cfg = detail::load_config(config);
      if (!mode_name.empty()) cfg.mode = detail::parse_mode(mode_name);
      if (*run_seed) cfg.seed = seed;
      const sim::World world = build(cfg, config);
      sim::FrameObserver observer;
      if (!debug_dir.empty()) {
        std::filesystem::create_directories(debug_dir);
        observer = [&](int step, const GrayImage& frame, const vision::VisionTrace& tr) {
          if (step % debug_every == 0) detail::write_debug(debug_dir, step, frame, tr);
        };
      }
      const sim::TrajectoryRecord rec = sim::run_scenario(cfg, observer);
      if (csv_path.empty()) {
        write_csv(out, rec, world.truth_line);
      } else {
        auto os = detail::open_out(csv_path);
        write_csv(os, rec, world.truth_line);
      }
      const RunSummary s = summarize(rec, world.truth_line);
      if (!summary_path.empty()) {
        auto os = detail::open_out(summary_path);
        write_summary(os, s);
      } else {
        write_summary(csv_path.empty() ? err : out, s);
      }
      return kExitOk;
    }
    if (*cmp) {
      sim::ScenarioConfig cfg = detail::load_config(config);
      if (*cmp_seed) cfg.seed = seed;
      const auto modes = detail::parse_modes(modes_list);
      const sim::World world = build(cfg, config);
      std::vector<RunSummary> rows;
      for (const auto m : modes) {
        sim::ScenarioConfig c = cfg;
        c.mode = m;
        rows.push_back(summarize(sim::run_scenario(c), world.truth_line));
      }
      out << "scenario " << config << ", seed " << cfg.seed << ", lateral deviation from the navigation line\n";
      write_comparison(out, rows, paired_mode(cfg));
      return kExitOk;
    }
    if (*fix) {
      const sim::World world = sim::build_world(sim::fixture_config());
      std::filesystem::create_directories(fixture_dir);
      for (const auto& f : sim::golden_frames()) {
        const auto path = std::filesystem::path(fixture_dir) / f.name;
        write_pgm(path, sim::render_golden(world, f));
        out << "wrote " << path.string() << '\n';
      }
      return kExitOk;
    }
  } catch (const detail::UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace aislenav::eval
