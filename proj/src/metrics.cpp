#include "ecosim/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace ecosim {

MetricsRecord record_metrics(const WorldState& world, const SimConfig& cfg,
                             const TraceWindow& window) {
  MetricsRecord rec;
  rec.step = world.step;
  rec.population = world.agents.live_count();
  const auto& map = world.map;
  for (std::size_t c = 0; c < map.cell_count(); ++c) {
    if (map.water[c] < cfg.metrics.dry_threshold) {
      rec.free_dry_biomass += map.biomass[c];
    } else {
      rec.free_wet_biomass += map.biomass[c];
    }
    rec.total_water += map.water[c];
  }
  double hp_sum = 0.0;
  double age_sum = 0.0;
  for (const auto& agent : world.agents.slots()) {
    if (!agent.alive) continue;
    rec.agent_biomass += agent.store_biomass + cfg.resources.base_biomass;
    rec.total_water += agent.store_water;
    hp_sum += agent.hp;
    age_sum += agent.age;
  }
  rec.total_biomass = rec.free_dry_biomass + rec.free_wet_biomass + rec.agent_biomass;
  if (rec.total_biomass > 0) {
    rec.biomass_utilization =
        static_cast<double>(rec.agent_biomass) / static_cast<double>(rec.total_biomass);
  }
  if (rec.population > 0) {
    rec.mean_hp = hp_sum / rec.population;
    rec.mean_age = age_sum / rec.population;
  }

  const auto& a = window.sum.actions;
  const auto count = [&](Action act) { return static_cast<double>(a[static_cast<int>(act)]); };
  double total = 0.0;
  for (auto v : a) total += v;
  if (total > 0.0) {
    rec.frac_move = (count(Action::TurnCW) + count(Action::TurnCCW) + count(Action::Forward)) / total;
    rec.frac_eat = (count(Action::EatWater) + count(Action::EatEnergy) + count(Action::EatBiomass)) / total;
    rec.frac_attack = count(Action::Attack) / total;
    rec.frac_rest = count(Action::Rest) / total;
    rec.frac_reproduce = count(Action::Reproduce) / total;
  }
  rec.attacks = window.sum.attacks;
  rec.homicides = window.sum.deaths_attack;
  if (rec.attacks > 0) {
    rec.homicides_per_attack = static_cast<double>(rec.homicides) / static_cast<double>(rec.attacks);
  }
  rec.births = window.sum.births;
  rec.deaths_attack = window.sum.deaths_attack;
  rec.deaths_starvation = window.sum.deaths_starvation;
  rec.deaths_age = window.sum.deaths_age;
  return rec;
}

std::vector<double> smooth_series(std::span<const double> values, int window) {
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  std::vector<double> out(values.size());
  // Direct summation: identical windows give bit-identical averages, which
  // keeps plateau ties stable under rescaling.
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - window);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + window);
    double sum = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) sum += values[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::vector<MiningEvent> detect_mining_events(std::span<const std::uint64_t> steps,
                                              std::span<const double> values,
                                              const DetectorSettings& settings) {
  if (values.empty()) throw std::invalid_argument("mining detector needs a non-empty series");
  if (steps.size() != values.size()) {
    throw std::invalid_argument("step and value series differ in length");
  }
  const std::vector<double> s = smooth_series(values, settings.window);
  const std::size_t n = s.size();
  const auto w = static_cast<std::size_t>(std::max(0, settings.window));
  std::vector<MiningEvent> events;
  std::size_t covered_until = 0;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (any && i <= covered_until) continue;
    const double peak = s[i];
    if (!(peak > 0.0)) continue;
    const std::size_t lo = i > w ? i - w : 0;
    const std::size_t hi = std::min(n - 1, i + w);
    bool is_max = true;
    for (std::size_t j = lo; j <= hi && is_max; ++j) is_max = s[j] <= peak;
    if (!is_max) continue;

    double trough = peak;
    std::size_t trough_at = i;
    std::size_t j = i + 1;
    for (; j < n && s[j] <= peak; ++j) {
      if (s[j] < trough) {
        trough = s[j];
        trough_at = j;
      }
    }
    const double drop = (peak - trough) / peak;
    if (drop < settings.threshold) continue;
    const std::uint64_t r = settings.onset_rounding;
    MiningEvent ev;
    ev.peak_step = steps[i];
    ev.trough_step = steps[trough_at];
    ev.onset_step = r > 0 ? (steps[i] + r / 2) / r * r : steps[i];
    ev.percent_drop = 100.0 * drop;
    events.push_back(ev);
    // Later maxima inside this decline belong to the same event.
    covered_until = j > 0 ? j - 1 : 0;
    any = true;
  }
  return events;
}

std::optional<std::uint64_t> detect_extinction(std::span<const std::uint64_t> steps,
                                               std::span<const std::uint32_t> population) {
  if (steps.size() != population.size()) {
    throw std::invalid_argument("step and population series differ in length");
  }
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (population[i] == 0) return steps[i];
  }
  return std::nullopt;
}

RunAggregates aggregate_run(std::span<const MetricsRecord> records) {
  RunAggregates agg;
  if (records.empty()) return agg;
  double kill_rate_sum = 0.0;
  std::size_t kill_rate_samples = 0;
  std::size_t active = 0;
  for (const auto& r : records) {
    agg.mean_population += r.population;
    if (r.population == 0) continue;
    ++active;
    agg.mean_utilization += r.biomass_utilization;
    agg.mean_attacks_per_agent += r.frac_attack;
    agg.mean_move_fraction += r.frac_move;
    agg.mean_eat_fraction += r.frac_eat;
    if (r.attacks > 0) {
      kill_rate_sum += r.homicides_per_attack;
      ++kill_rate_samples;
    }
  }
  agg.mean_population /= static_cast<double>(records.size());
  if (active > 0) {
    agg.mean_utilization /= static_cast<double>(active);
    agg.mean_attacks_per_agent /= static_cast<double>(active);
    agg.mean_move_fraction /= static_cast<double>(active);
    agg.mean_eat_fraction /= static_cast<double>(active);
  }
  if (kill_rate_samples > 0) agg.mean_homicides_per_attack = kill_rate_sum / static_cast<double>(kill_rate_samples);
  agg.final_step = records.back().step;
  agg.final_population = records.back().population;
  return agg;
}

EventReport analyze_run(std::span<const MetricsRecord> records, const DetectorSettings& settings) {
  EventReport report;
  if (records.empty()) return report;
  std::vector<std::uint64_t> steps;
  std::vector<double> dry;
  std::vector<std::uint32_t> population;
  for (const auto& r : records) {
    steps.push_back(r.step);
    dry.push_back(static_cast<double>(r.free_dry_biomass));
    population.push_back(r.population);
  }
  report.mining = detect_mining_events(steps, dry, settings);
  report.extinction_step = detect_extinction(steps, population);
  report.aggregates = aggregate_run(records);
  return report;
}

std::vector<SummaryRow> summarize_runs(std::span<const RunResult> runs) {
  if (runs.empty()) throw std::invalid_argument("summarize_runs needs at least one run");
  std::vector<SummaryRow> rows;
  struct Sums {
    double onset = 0.0;
    double drop = 0.0;
  };
  std::vector<Sums> sums;
  for (const auto& run : runs) {
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const SummaryRow& r) { return r.configuration == run.configuration; });
    if (it == rows.end()) {
      rows.push_back(SummaryRow{});
      rows.back().configuration = run.configuration;
      sums.emplace_back();
      it = rows.end() - 1;
    }
    auto& row = *it;
    auto& sum = sums[static_cast<std::size_t>(it - rows.begin())];
    ++row.runs;
    if (!run.report.mining.empty()) {
      ++row.mining_runs;
      sum.onset += static_cast<double>(run.report.mining.front().onset_step);
      sum.drop += run.report.mining.front().percent_drop;
    }
    if (run.report.extinction_step) ++row.extinct_runs;
    const auto& agg = run.report.aggregates;
    row.mean_homicides_per_attack += agg.mean_homicides_per_attack;
    row.mean_attacks_per_agent += agg.mean_attacks_per_agent;
    row.mean_utilization += agg.mean_utilization;
    row.mean_move_fraction += agg.mean_move_fraction;
    row.mean_eat_fraction += agg.mean_eat_fraction;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& row = rows[i];
    const double n = row.runs;
    row.mean_homicides_per_attack /= n;
    row.mean_attacks_per_agent /= n;
    row.mean_utilization /= n;
    row.mean_move_fraction /= n;
    row.mean_eat_fraction /= n;
    if (row.mining_runs > 0) {
      row.mean_onset = sums[i].onset / row.mining_runs;
      row.mean_drop = sums[i].drop / row.mining_runs;
    }
  }
  return rows;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string summary_csv(std::span<const SummaryRow> rows) {
  std::ostringstream out;
  out << "configuration,runs,mining,extinct,mean_onset,mean_drop,mean_homicides_per_attack,"
         "mean_attacks_per_agent,mean_utilization,mean_move_fraction,mean_eat_fraction\n";
  for (const auto& r : rows) {
    out << r.configuration << ',' << r.runs << ',' << r.mining_runs << '/' << r.runs << ','
        << r.extinct_runs << '/' << r.runs << ',' << (r.mean_onset ? fmt(*r.mean_onset) : "")
        << ',' << (r.mean_drop ? fmt(*r.mean_drop) : "") << ','
        << fmt(r.mean_homicides_per_attack) << ',' << fmt(r.mean_attacks_per_agent) << ','
        << fmt(r.mean_utilization) << ',' << fmt(r.mean_move_fraction) << ','
        << fmt(r.mean_eat_fraction) << '\n';
  }
  return out.str();
}

}  // namespace ecosim
