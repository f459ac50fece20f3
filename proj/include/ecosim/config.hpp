#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ecosim {

/// Fixed-point resource quantity. Water depth uses the same unit, with
/// kUnitsPerHeight units per height unit of rock.
using Units = std::int64_t;

inline constexpr std::int32_t kUnitsPerHeight = 1024;
inline constexpr int kSchemaVersion = 1;

enum class TerrainKind { Ocean, Beach, Island, Lake, Isthmus, Channel };
enum class SensorSet { R, RC, RCV };

/// Energy and water charged for one action.
struct ActionCost {
  std::int32_t energy = 1;
  std::int32_t water = 1;
};

struct ResourceConfig {
  ActionCost rest{1, 1};
  ActionCost move{2, 1};
  ActionCost attack{4, 1};
  ActionCost eat{2, 1};
  ActionCost reproduce{2, 1};
  std::int32_t eat_amount = 32;
  std::int32_t stomach_capacity = 256;
  std::int32_t base_biomass = 128;
  std::int32_t child_energy = 64;
  std::int32_t child_water = 64;
  std::int32_t energy_growth_rate = 1;
  std::int32_t energy_cap = 256;
  std::int32_t flow_rate = 64;
  /// Average free biomass and energy per cell at step 0.
  std::int32_t biomass_per_cell = 256;
  std::int32_t energy_per_cell = 32;
  /// Scatter granularity used when seeding resources.
  std::int32_t scatter_quantum = 32;
  /// Initial stores of the starting population as a fraction of capacity.
  double initial_store_fraction = 0.5;
};

struct HealthConfig {
  float max_hp = 100.0f;
  float starvation_damage = 5.0f;
  float recovery_rate = 1.0f;
  std::uint32_t age_onset = 1000;
  float age_slope = 0.0005f;
  /// Healing requires both energy and water stores above this fraction of capacity.
  float heal_threshold = 0.1f;
  std::int32_t heal_energy = 1;
  std::int32_t heal_water = 1;
};

struct PolicyConfig {
  int hidden_width = 64;
  float mutation_std = 3e-2f;
  float min_temperature = 0.05f;
  float max_temperature = 5.0f;
  /// 0 derives the head width from the sensor set and attack flag.
  int action_count = 0;
};

struct SensingConfig {
  double age_scale = 10000.0;
  double elevation_scale = 4.0;
  std::int32_t water_scale = 1024;
  std::int32_t energy_scale = 256;
  std::int32_t biomass_scale = 256;
  float land_gray_min = 0.35f;
  float land_gray_gain = 0.45f;
  float water_blue_min = 0.45f;
  float water_blue_gain = 0.55f;
  float energy_tint = 0.6f;
  float biomass_tint = 0.6f;
};

struct MetricsConfig {
  std::uint64_t every = 100;
  int smoothing_window = 50;
  std::int32_t dry_threshold = 8;
  double mining_threshold = 0.10;
  std::uint64_t onset_rounding = 5000;
  std::uint64_t heartbeat_every = 0;
};

struct SimConfig {
  int schema_version = kSchemaVersion;
  int grid_size = 64;
  TerrainKind terrain = TerrainKind::Beach;
  double sea_level = 1.0;
  double roughness = 0.1;
  double relief = 0.75;
  SensorSet sensors = SensorSet::RC;
  bool attack_enabled = false;
  std::uint32_t max_population = 512;
  std::uint32_t initial_population = 128;
  std::uint64_t steps = 10000;
  std::uint64_t seed = 0;
  ResourceConfig resources;
  HealthConfig health;
  PolicyConfig policy;
  SensingConfig sensing;
  MetricsConfig metrics;

  [[nodiscard]] std::size_t cell_count() const {
    return static_cast<std::size_t>(grid_size) * static_cast<std::size_t>(grid_size);
  }
  [[nodiscard]] Units biomass_budget() const {
    return static_cast<Units>(resources.biomass_per_cell) * static_cast<Units>(cell_count());
  }
  [[nodiscard]] Units energy_budget() const {
    return static_cast<Units>(resources.energy_per_cell) * static_cast<Units>(cell_count());
  }
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Checks every config invariant and fills derived defaults (action_count).
/// Throws ConfigError naming the offending field.
SimConfig validate_config(SimConfig raw);

/// reference_pop * (grid_size / reference_size)^2, rounded to nearest.
std::uint32_t scale_initial_population(std::uint64_t grid_size, std::uint64_t reference_size,
                                       std::uint64_t reference_pop);

/// Number of discrete actions the policy head emits.
int action_count_for(bool attack_enabled);

std::string_view to_string(TerrainKind kind);
std::string_view to_string(SensorSet sensors);
TerrainKind parse_terrain(std::string_view name);
SensorSet parse_sensors(std::string_view name);

/// Builds a bundled experiment preset, e.g. "beach_rc_256" or "ocean_rcv_attack_128".
/// Population follows the Beach table: 8192 agents at 512x512, scaled by area,
/// with four times that many agent slots.
SimConfig make_preset(std::string_view name);

}  // namespace ecosim
