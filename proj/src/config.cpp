#include "ecosim/config.hpp"

#include <cctype>
#include <cmath>
#include <string>
#include <vector>

namespace ecosim {

namespace {

void require(bool ok, const char* field, const std::string& why) {
  if (!ok) throw ConfigError(field, why);
}

void require_cost(const ActionCost& cost, const char* field) {
  require(cost.energy > 0, field, "energy cost must be strictly positive");
  require(cost.water > 0, field, "water cost must be strictly positive");
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

int action_count_for(bool attack_enabled) { return attack_enabled ? 9 : 8; }

SimConfig validate_config(SimConfig cfg) {
  require(cfg.schema_version == kSchemaVersion, "schema_version",
          "unsupported schema version " + std::to_string(cfg.schema_version));
  require(is_power_of_two(cfg.grid_size) && cfg.grid_size >= 16 && cfg.grid_size <= 1024,
          "grid_size", "must be a power of two in [16, 1024]");
  require(std::isfinite(cfg.sea_level) && cfg.sea_level > 0.0, "sea_level",
          "must be finite and positive");
  require(std::isfinite(cfg.roughness) && cfg.roughness >= 0.0, "roughness",
          "must be finite and non-negative");
  require(std::isfinite(cfg.relief) && cfg.relief > 0.0, "relief", "must be positive");
  require(cfg.relief + cfg.roughness <= cfg.sea_level, "relief",
          "relief plus roughness must keep rock heights non-negative");
  require(cfg.max_population >= 1, "max_population", "must be at least 1");
  require(cfg.initial_population <= cfg.max_population, "initial_population",
          "must not exceed max_population");
  require(cfg.max_population <= cfg.cell_count(), "max_population",
          "must not exceed grid_size^2");

  const auto& r = cfg.resources;
  require_cost(r.rest, "resources.rest");
  require_cost(r.move, "resources.move");
  require_cost(r.attack, "resources.attack");
  require_cost(r.eat, "resources.eat");
  require_cost(r.reproduce, "resources.reproduce");
  require(r.eat_amount > 0, "resources.eat_amount", "must be strictly positive");
  require(r.stomach_capacity > 0, "resources.stomach_capacity", "must be strictly positive");
  require(r.base_biomass > 0, "resources.base_biomass", "must be strictly positive");
  require(r.base_biomass <= r.stomach_capacity, "resources.base_biomass",
          "must fit in the stomach so reproduction is reachable");
  require(r.child_energy > 0, "resources.child_energy", "must be strictly positive");
  require(r.child_water > 0, "resources.child_water", "must be strictly positive");
  require(r.child_energy + r.reproduce.energy <= r.stomach_capacity, "resources.child_energy",
          "endowment plus reproduce cost must fit in the stomach");
  require(r.child_water + r.reproduce.water <= r.stomach_capacity, "resources.child_water",
          "endowment plus reproduce cost must fit in the stomach");
  require(r.energy_growth_rate > 0, "resources.energy_growth_rate", "must be strictly positive");
  require(r.energy_cap > 0, "resources.energy_cap", "must be strictly positive");
  require(r.flow_rate > 0, "resources.flow_rate", "must be strictly positive");
  require(r.biomass_per_cell > 0, "resources.biomass_per_cell", "must be strictly positive");
  require(r.energy_per_cell > 0, "resources.energy_per_cell", "must be strictly positive");
  require(r.scatter_quantum > 0, "resources.scatter_quantum", "must be strictly positive");
  require(r.initial_store_fraction > 0.0 && r.initial_store_fraction <= 1.0,
          "resources.initial_store_fraction", "must be in (0, 1]");

  const auto& h = cfg.health;
  require(h.max_hp > 0.0f, "health.max_hp", "must be strictly positive");
  require(h.starvation_damage > 0.0f, "health.starvation_damage", "must be strictly positive");
  require(h.recovery_rate > 0.0f, "health.recovery_rate", "must be strictly positive");
  require(h.age_onset > 0, "health.age_onset", "must be strictly positive");
  require(h.age_slope > 0.0f, "health.age_slope", "must be strictly positive");
  require(h.heal_threshold > 0.0f && h.heal_threshold < 1.0f, "health.heal_threshold",
          "must be in (0, 1)");
  require(h.heal_energy > 0, "health.heal_energy", "must be strictly positive");
  require(h.heal_water > 0, "health.heal_water", "must be strictly positive");

  auto& p = cfg.policy;
  require(p.hidden_width > 0, "policy.hidden_width", "must be strictly positive");
  require(p.mutation_std > 0.0f && std::isfinite(p.mutation_std), "policy.mutation_std",
          "must be strictly positive");
  require(p.min_temperature > 0.0f, "policy.min_temperature", "must be strictly positive");
  require(p.max_temperature > p.min_temperature, "policy.max_temperature",
          "must exceed min_temperature");
  require(p.min_temperature <= 1.0f && p.max_temperature >= 1.0f, "policy.min_temperature",
          "temperature bounds must contain the initial temperature 1");
  const int expected_actions = action_count_for(cfg.attack_enabled);
  if (p.action_count == 0) p.action_count = expected_actions;
  require(p.action_count == expected_actions, "policy.action_count",
          "head width " + std::to_string(p.action_count) + " does not match attack_enabled=" +
              (cfg.attack_enabled ? std::string("true") : std::string("false")));

  const auto& s = cfg.sensing;
  require(s.age_scale > 0.0, "sensing.age_scale", "must be strictly positive");
  require(s.elevation_scale > 0.0, "sensing.elevation_scale", "must be strictly positive");
  require(s.water_scale > 0 && s.energy_scale > 0 && s.biomass_scale > 0, "sensing.water_scale",
          "external sensor scales must be strictly positive");

  const auto& m = cfg.metrics;
  require(m.every > 0, "metrics.every", "must be strictly positive");
  require(m.smoothing_window >= 0, "metrics.smoothing_window", "must be non-negative");
  require(m.dry_threshold > 0, "metrics.dry_threshold", "must be strictly positive");
  require(m.mining_threshold > 0.0 && m.mining_threshold < 1.0, "metrics.mining_threshold",
          "must be in (0, 1)");
  require(m.onset_rounding > 0, "metrics.onset_rounding", "must be strictly positive");
  return cfg;
}

std::uint32_t scale_initial_population(std::uint64_t grid_size, std::uint64_t reference_size,
                                       std::uint64_t reference_pop) {
  if (reference_size == 0) throw std::invalid_argument("reference size must be non-zero");
  if (grid_size == 0 || reference_pop == 0) {
    throw std::invalid_argument("grid size and reference population must be positive");
  }
  const std::uint64_t num = reference_pop * grid_size * grid_size;
  const std::uint64_t den = reference_size * reference_size;
  return static_cast<std::uint32_t>((num + den / 2) / den);
}

std::string_view to_string(TerrainKind kind) {
  switch (kind) {
    case TerrainKind::Ocean: return "ocean";
    case TerrainKind::Beach: return "beach";
    case TerrainKind::Island: return "island";
    case TerrainKind::Lake: return "lake";
    case TerrainKind::Isthmus: return "isthmus";
    case TerrainKind::Channel: return "channel";
  }
  return "unknown";
}

std::string_view to_string(SensorSet sensors) {
  switch (sensors) {
    case SensorSet::R: return "R";
    case SensorSet::RC: return "RC";
    case SensorSet::RCV: return "RCV";
  }
  return "unknown";
}

TerrainKind parse_terrain(std::string_view name) {
  for (auto kind : {TerrainKind::Ocean, TerrainKind::Beach, TerrainKind::Island, TerrainKind::Lake,
                    TerrainKind::Isthmus, TerrainKind::Channel}) {
    std::string lowered(name);
    for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lowered == to_string(kind)) return kind;
  }
  throw ConfigError("terrain", "unknown terrain '" + std::string(name) + "'");
}

SensorSet parse_sensors(std::string_view name) {
  std::string upper(name);
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "R") return SensorSet::R;
  if (upper == "RC") return SensorSet::RC;
  if (upper == "RCV") return SensorSet::RCV;
  throw ConfigError("sensors", "unknown sensor set '" + std::string(name) + "'");
}

SimConfig make_preset(std::string_view name) {
  const auto parts = split(name, '_');
  if (parts.size() < 3 || parts.size() > 4 || (parts.size() == 4 && parts[2] != "attack")) {
    throw ConfigError("preset", "unknown preset '" + std::string(name) +
                                    "' (expected <terrain>_<r|rc|rcv>[_attack]_<size>)");
  }
  SimConfig cfg;
  cfg.terrain = parse_terrain(parts[0]);
  cfg.sensors = parse_sensors(parts[1]);
  cfg.attack_enabled = parts.size() == 4;
  const std::string size_text(parts.back());
  int size = 0;
  try {
    std::size_t used = 0;
    size = std::stoi(size_text, &used);
    if (used != size_text.size()) size = 0;
  } catch (const std::exception&) {
    size = 0;
  }
  if (size != 64 && size != 128 && size != 256 && size != 512 && size != 1024) {
    throw ConfigError("preset", "unsupported preset grid size '" + size_text + "'");
  }
  cfg.grid_size = size;
  cfg.initial_population = scale_initial_population(static_cast<std::uint64_t>(size), 512, 8192);
  cfg.max_population = cfg.initial_population * 4;
  cfg.steps = 2'000'000;
  return validate_config(cfg);
}

}  // namespace ecosim
