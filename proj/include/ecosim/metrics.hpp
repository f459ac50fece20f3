#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecosim/config.hpp"
#include "ecosim/dynamics.hpp"
#include "ecosim/world.hpp"

namespace ecosim {

/// StepTraces accumulated since the previous metrics sample.
struct TraceWindow {
  StepTrace sum;
  std::uint64_t steps = 0;

  void add(const StepTrace& trace) {
    sum += trace;
    ++steps;
  }
  void clear() { *this = TraceWindow{}; }
};

struct MetricsRecord {
  std::uint64_t step = 0;
  std::uint32_t population = 0;
  Units free_dry_biomass = 0;
  Units free_wet_biomass = 0;
  /// Biomass inside agents, stores plus base body biomass.
  Units agent_biomass = 0;
  Units total_biomass = 0;
  Units total_water = 0;
  double biomass_utilization = 0.0;
  // Share of agent actions in the window; all zero when no agent acted.
  double frac_move = 0.0;
  double frac_eat = 0.0;
  double frac_attack = 0.0;
  double frac_rest = 0.0;
  double frac_reproduce = 0.0;
  std::uint64_t attacks = 0;
  std::uint64_t homicides = 0;
  /// homicides / attacks; 0 when there were no attacks.
  double homicides_per_attack = 0.0;
  std::uint64_t births = 0;
  std::uint64_t deaths_attack = 0;
  std::uint64_t deaths_starvation = 0;
  std::uint64_t deaths_age = 0;
  double mean_hp = 0.0;
  double mean_age = 0.0;
};

MetricsRecord record_metrics(const WorldState& world, const SimConfig& cfg,
                             const TraceWindow& window);

struct MiningEvent {
  /// Step of the smoothed local maximum, rounded to onset_rounding.
  std::uint64_t onset_step = 0;
  double percent_drop = 0.0;
  std::uint64_t peak_step = 0;
  std::uint64_t trough_step = 0;
};

/// Per-run means of the foraging and predation statistics.
struct RunAggregates {
  double mean_population = 0.0;
  double mean_utilization = 0.0;
  double mean_homicides_per_attack = 0.0;
  double mean_attacks_per_agent = 0.0;
  double mean_move_fraction = 0.0;
  double mean_eat_fraction = 0.0;
  std::uint64_t final_step = 0;
  std::uint32_t final_population = 0;
};

struct EventReport {
  std::vector<MiningEvent> mining;
  std::optional<std::uint64_t> extinction_step;
  RunAggregates aggregates;
};

struct DetectorSettings {
  int window = 50;
  double threshold = 0.10;
  std::uint64_t onset_rounding = 5000;

  static DetectorSettings from(const MetricsConfig& m) {
    return {m.smoothing_window, m.mining_threshold, m.onset_rounding};
  }
};

/// Centered moving average over +-window samples, truncated at the ends.
std::vector<double> smooth_series(std::span<const double> values, int window);

/// Finds drops of at least `threshold` (relative) in the smoothed series from
/// a local maximum to the lowest point before the series next exceeds it.
/// Throws std::invalid_argument for an empty series or mismatched spans.
std::vector<MiningEvent> detect_mining_events(std::span<const std::uint64_t> steps,
                                              std::span<const double> values,
                                              const DetectorSettings& settings);

/// First sampled step with population zero.
std::optional<std::uint64_t> detect_extinction(std::span<const std::uint64_t> steps,
                                               std::span<const std::uint32_t> population);

RunAggregates aggregate_run(std::span<const MetricsRecord> records);

/// Runs every detector over a metrics series.
EventReport analyze_run(std::span<const MetricsRecord> records, const DetectorSettings& settings);

struct RunResult {
  std::string configuration;
  EventReport report;
};

/// One row per configuration, in order of first appearance.
struct SummaryRow {
  std::string configuration;
  std::uint32_t runs = 0;
  std::uint32_t mining_runs = 0;
  std::uint32_t extinct_runs = 0;
  std::optional<double> mean_onset;
  std::optional<double> mean_drop;
  double mean_homicides_per_attack = 0.0;
  double mean_attacks_per_agent = 0.0;
  double mean_utilization = 0.0;
  double mean_move_fraction = 0.0;
  double mean_eat_fraction = 0.0;
};

/// Throws std::invalid_argument for an empty run list.
std::vector<SummaryRow> summarize_runs(std::span<const RunResult> runs);

/// CSV with "k/n" mining and extinction columns; absent means are empty fields.
std::string summary_csv(std::span<const SummaryRow> rows);

}  // namespace ecosim
