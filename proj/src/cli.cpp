#include "ecosim/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "ecosim/engine.hpp"
#include "ecosim/io.hpp"
#include "json.hpp"

namespace ecosim {

namespace {

namespace fs = std::filesystem;

/// Raised for mistakes in what the user asked for; maps to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> steps;
  std::string out = ".";
  int workers = 1;
  std::uint64_t snapshot_every = 0;
  std::string snapshot;
  std::uint32_t seeds = 4;
  std::string in;
};

void apply_worker_env(RunOptions& o) {
  const char* env = std::getenv("ECOSIM_WORKERS");
  if (env == nullptr || *env == '\0') return;
  int value = 0;
  const auto* end = env + std::strlen(env);
  const auto [ptr, ec] = std::from_chars(env, end, value);
  if (ec != std::errc() || ptr != end || value < 1 || value > 1024) {
    throw UsageError(std::string("ECOSIM_WORKERS must be an integer in [1, 1024], got '") + env + "'");
  }
  o.workers = value;
}

SimConfig resolve_config(const RunOptions& o) {
  if (!o.config_path.empty() && !o.preset.empty()) {
    throw UsageError("--config and --preset are mutually exclusive");
  }
  SimConfig cfg;
  if (!o.config_path.empty()) {
    cfg = load_config(o.config_path);
  } else if (!o.preset.empty()) {
    cfg = make_preset(o.preset);
  } else {
    throw UsageError("one of --config or --preset is required");
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.steps) cfg.steps = *o.steps;
  return validate_config(cfg);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text << '\n';
}

fs::path snapshot_name(std::uint64_t step) {
  return "snapshot_" + std::to_string(step) + ".snap";
}

struct RunOutcome {
  EpisodeResult episode;
  EventReport report;
};

RunOutcome run_into(Engine& engine, const fs::path& dir, std::uint64_t snapshot_every,
                    bool record_initial, std::ostream& out) {
  fs::create_directories(dir);
  const SimConfig& cfg = engine.config();
  write_text(dir / "config.json", config_to_json(cfg));
  EpisodeOptions opts;
  opts.record_initial = record_initial;
  opts.snapshot_every = snapshot_every;
  opts.on_snapshot = [&](const Engine& e) {
    save_snapshot(dir / snapshot_name(e.world().step), e.config(), e.world(), e.pool());
  };
  opts.heartbeat = &out;
  RunOutcome outcome;
  outcome.episode = run_episode(engine, opts);
  write_metrics_csv(dir / "metrics.csv", outcome.episode.records);
  save_snapshot(dir / "final.snap", cfg, engine.world(), engine.pool());
  outcome.report = analyze_run(outcome.episode.records, DetectorSettings::from(cfg.metrics));
  write_text(dir / "events.json", event_report_json(outcome.report, configuration_label(cfg), cfg.seed));
  return outcome;
}

void print_outcome(std::ostream& out, const Engine& engine, const RunOutcome& r) {
  out << "step " << r.episode.final_step << " population " << engine.world().agents.live_count()
      << " termination " << to_string(r.episode.termination) << " mining_events "
      << r.report.mining.size() << " digest " << engine.digest().hex() << '\n';
}

int cmd_run(const RunOptions& o, std::ostream& out) {
  const SimConfig cfg = resolve_config(o);
  Engine engine(cfg, o.workers);
  const auto outcome = run_into(engine, o.out, o.snapshot_every, true, out);
  print_outcome(out, engine, outcome);
  return 0;
}

int cmd_resume(const RunOptions& o, std::ostream& out) {
  if (o.snapshot.empty()) throw UsageError("--snapshot is required");
  Snapshot snap = load_snapshot(o.snapshot);
  SimConfig cfg = snap.config;
  if (o.steps) cfg.steps = snap.world.step + *o.steps;
  Engine engine(cfg, std::move(snap.world), std::move(snap.pool), o.workers);
  const auto outcome = run_into(engine, o.out, o.snapshot_every, false, out);
  print_outcome(out, engine, outcome);
  return 0;
}

std::string summarize_dirs(const std::vector<fs::path>& dirs) {
  std::vector<RunResult> runs;
  for (const auto& dir : dirs) {
    const SimConfig cfg = load_config(dir / "config.json");
    const auto records = read_metrics_csv(dir / "metrics.csv");
    runs.push_back({configuration_label(cfg), analyze_run(records, DetectorSettings::from(cfg.metrics))});
  }
  if (runs.empty()) throw std::runtime_error("no runs found");
  const auto rows = summarize_runs(runs);
  return summary_csv(rows);
}

int cmd_batch(const RunOptions& o, std::ostream& out) {
  if (o.seeds == 0) throw UsageError("--seeds must be positive");
  const SimConfig base = resolve_config(o);
  const fs::path root = o.out;
  std::vector<fs::path> dirs;
  for (std::uint32_t k = 0; k < o.seeds; ++k) {
    SimConfig cfg = base;
    cfg.seed = base.seed + k;
    const fs::path dir = root / ("seed_" + std::to_string(cfg.seed));
    Engine engine(cfg, o.workers);
    const auto outcome = run_into(engine, dir, o.snapshot_every, true, out);
    out << "seed " << cfg.seed << ": ";
    print_outcome(out, engine, outcome);
    dirs.push_back(dir);
  }
  const std::string csv = summarize_dirs(dirs);
  std::ofstream(root / "summary.csv") << csv;
  out << csv;
  return 0;
}

int cmd_summarize(const RunOptions& o, std::ostream& out) {
  if (o.in.empty()) throw UsageError("--in is required");
  if (!fs::is_directory(o.in)) throw std::runtime_error("not a directory: " + o.in);
  std::vector<fs::path> dirs;
  if (fs::exists(fs::path(o.in) / "metrics.csv")) dirs.emplace_back(o.in);
  for (const auto& entry : fs::directory_iterator(o.in)) {
    if (entry.is_directory() && fs::exists(entry.path() / "metrics.csv") &&
        fs::exists(entry.path() / "config.json")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  out << summarize_dirs(dirs);
  return 0;
}

int cmd_render(const RunOptions& o, std::ostream& out) {
  if (o.snapshot.empty()) throw UsageError("--snapshot is required");
  const Snapshot snap = load_snapshot(o.snapshot);
  fs::path target = o.out;
  if (target.extension() != ".png") target /= "map.png";
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  render_map_image(snap.world, snap.config, target);
  out << "wrote " << target.string() << '\n';
  return 0;
}

int cmd_validate(const RunOptions& o, std::ostream& out) {
  SimConfig cfg;
  try {
    cfg = resolve_config(o);
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    // Anything that stops a config from loading is a validation failure here.
    throw ConfigError(o.config_path.empty() ? "preset" : o.config_path, e.what());
  }
  out << "ok " << configuration_label(cfg) << " parameters "
      << count_parameters(PolicyArch::make(cfg.sensors, cfg.attack_enabled, cfg.policy.hidden_width))
      << '\n';
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grid-world artificial life simulator", "ecosim"};
  app.require_subcommand(1, 1);
  RunOptions o;

  const auto add_source = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config_path, "Config JSON file");
    cmd->add_option("--preset", o.preset, "Bundled preset, e.g. beach_rc_64");
    cmd->add_option("--seed", o.seed, "Override the config seed");
    cmd->add_option("--steps", o.steps, "Override the episode length");
  };
  const auto add_exec = [&](CLI::App* cmd) {
    cmd->add_option("--workers", o.workers, "Worker threads (default $ECOSIM_WORKERS or 1)")
        ->check(CLI::Range(1, 1024));
    cmd->add_option("--snapshot-every", o.snapshot_every, "Write snapshot_<step>.snap every N steps");
  };

  auto* run = app.add_subcommand("run", "Run one episode");
  add_source(run);
  add_exec(run);
  run->add_option("--out", o.out, "Output directory");

  auto* resume = app.add_subcommand("resume", "Continue an episode from a snapshot");
  resume->add_option("--snapshot", o.snapshot, "Snapshot file")->required();
  resume->add_option("--steps", o.steps, "Additional steps (default: to the configured length)");
  resume->add_option("--out", o.out, "Output directory");
  add_exec(resume);

  auto* batch = app.add_subcommand("batch", "Run several seeds and summarize");
  add_source(batch);
  add_exec(batch);
  batch->add_option("--seeds", o.seeds, "Number of seeds");
  batch->add_option("--out", o.out, "Output directory");

  auto* summarize = app.add_subcommand("summarize", "Summarize run directories");
  summarize->add_option("--in", o.in, "Directory of runs")->required();

  auto* render = app.add_subcommand("render", "Render a snapshot to PNG");
  render->add_option("--snapshot", o.snapshot, "Snapshot file")->required();
  render->add_option("--out", o.out, "Output PNG path or directory")->required();

  auto* validate = app.add_subcommand("validate", "Check a config file or preset");
  validate->add_option("--config", o.config_path, "Config JSON file");
  validate->add_option("--preset", o.preset, "Bundled preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    const auto* given = app.get_subcommands().front()->get_option_no_throw("--workers");
    if (given != nullptr && given->count() == 0) apply_worker_env(o);
    if (run->parsed()) return cmd_run(o, out);
    if (resume->parsed()) return cmd_resume(o, out);
    if (batch->parsed()) return cmd_batch(o, out);
    if (summarize->parsed()) return cmd_summarize(o, out);
    if (render->parsed()) return cmd_render(o, out);
    if (validate->parsed()) return cmd_validate(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace ecosim
