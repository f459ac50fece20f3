#include <fstream>
#include <set>
#include <sstream>

#include "ecosim/io.hpp"
#include "json.hpp"

namespace ecosim {

namespace {

using nlohmann::json;

/// Reads fields out of one JSON object, remembering which keys were used so
/// leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    used_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError(field(key), "expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw ConfigError(field(key), "expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (it->is_number_integer() && !it->is_number_unsigned() && it->template get<std::int64_t>() < 0) {
            throw ConfigError(field(key), "expected a non-negative integer");
          }
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw ConfigError(field(key), "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw ConfigError(field(key), "expected a string");
      }
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(field(key), e.what());
    }
  }

  void get_cost(const char* key, ActionCost& cost) {
    used_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    ObjectReader sub(*it, field(key));
    sub.get("energy", cost.energy);
    sub.get("water", cost.water);
    sub.finish();
  }

  const json* child(const char* key) {
    used_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  [[nodiscard]] std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!used_.contains(key)) throw ConfigError(field(key), "unknown key '" + key + "'");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> used_;
};

std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

void read_resources(ObjectReader& r, ResourceConfig& c) {
  r.get_cost("rest", c.rest);
  r.get_cost("move", c.move);
  r.get_cost("attack", c.attack);
  r.get_cost("eat", c.eat);
  r.get_cost("reproduce", c.reproduce);
  r.get("eat_amount", c.eat_amount);
  r.get("stomach_capacity", c.stomach_capacity);
  r.get("base_biomass", c.base_biomass);
  r.get("child_energy", c.child_energy);
  r.get("child_water", c.child_water);
  r.get("energy_growth_rate", c.energy_growth_rate);
  r.get("energy_cap", c.energy_cap);
  r.get("flow_rate", c.flow_rate);
  r.get("biomass_per_cell", c.biomass_per_cell);
  r.get("energy_per_cell", c.energy_per_cell);
  r.get("scatter_quantum", c.scatter_quantum);
  r.get("initial_store_fraction", c.initial_store_fraction);
}

void read_health(ObjectReader& r, HealthConfig& c) {
  r.get("max_hp", c.max_hp);
  r.get("starvation_damage", c.starvation_damage);
  r.get("recovery_rate", c.recovery_rate);
  r.get("age_onset", c.age_onset);
  r.get("age_slope", c.age_slope);
  r.get("heal_threshold", c.heal_threshold);
  r.get("heal_energy", c.heal_energy);
  r.get("heal_water", c.heal_water);
}

void read_policy(ObjectReader& r, PolicyConfig& c) {
  r.get("hidden_width", c.hidden_width);
  r.get("mutation_std", c.mutation_std);
  r.get("min_temperature", c.min_temperature);
  r.get("max_temperature", c.max_temperature);
  r.get("action_count", c.action_count);
}

void read_sensing(ObjectReader& r, SensingConfig& c) {
  r.get("age_scale", c.age_scale);
  r.get("elevation_scale", c.elevation_scale);
  r.get("water_scale", c.water_scale);
  r.get("energy_scale", c.energy_scale);
  r.get("biomass_scale", c.biomass_scale);
  r.get("land_gray_min", c.land_gray_min);
  r.get("land_gray_gain", c.land_gray_gain);
  r.get("water_blue_min", c.water_blue_min);
  r.get("water_blue_gain", c.water_blue_gain);
  r.get("energy_tint", c.energy_tint);
  r.get("biomass_tint", c.biomass_tint);
}

void read_metrics(ObjectReader& r, MetricsConfig& c) {
  r.get("every", c.every);
  r.get("smoothing_window", c.smoothing_window);
  r.get("dry_threshold", c.dry_threshold);
  r.get("mining_threshold", c.mining_threshold);
  r.get("onset_rounding", c.onset_rounding);
  r.get("heartbeat_every", c.heartbeat_every);
}

template <class Fn>
void read_section(ObjectReader& root, const char* key, Fn&& fn) {
  if (const json* sub = root.child(key)) {
    ObjectReader reader(*sub, key);
    fn(reader);
    reader.finish();
  }
}

json cost_json(const ActionCost& c) { return {{"energy", c.energy}, {"water", c.water}}; }

}  // namespace

SimConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<parse>", "line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  ObjectReader root(doc, "");
  int schema = -1;
  root.get("schema_version", schema);
  if (schema == -1) throw ConfigError("schema_version", "missing");
  if (schema != kSchemaVersion) {
    throw ConfigError("schema_version", "version " + std::to_string(schema) +
                                            " is not supported (expected " +
                                            std::to_string(kSchemaVersion) + ")");
  }
  SimConfig cfg;
  std::string preset;
  root.get("preset", preset);
  if (!preset.empty()) cfg = make_preset(preset);
  cfg.schema_version = schema;

  root.get("grid_size", cfg.grid_size);
  std::string terrain;
  root.get("terrain", terrain);
  if (!terrain.empty()) cfg.terrain = parse_terrain(terrain);
  root.get("sea_level", cfg.sea_level);
  root.get("roughness", cfg.roughness);
  root.get("relief", cfg.relief);
  std::string sensors;
  root.get("sensors", sensors);
  if (!sensors.empty()) cfg.sensors = parse_sensors(sensors);
  root.get("attack_enabled", cfg.attack_enabled);
  root.get("max_population", cfg.max_population);
  root.get("initial_population", cfg.initial_population);
  root.get("steps", cfg.steps);
  root.get("seed", cfg.seed);
  read_section(root, "resources", [&](ObjectReader& r) { read_resources(r, cfg.resources); });
  read_section(root, "health", [&](ObjectReader& r) { read_health(r, cfg.health); });
  read_section(root, "policy", [&](ObjectReader& r) { read_policy(r, cfg.policy); });
  read_section(root, "sensing", [&](ObjectReader& r) { read_sensing(r, cfg.sensing); });
  read_section(root, "metrics", [&](ObjectReader& r) { read_metrics(r, cfg.metrics); });
  root.finish();
  return validate_config(cfg);
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string config_to_json(const SimConfig& cfg) {
  const auto& r = cfg.resources;
  const auto& h = cfg.health;
  const auto& p = cfg.policy;
  const auto& s = cfg.sensing;
  const auto& m = cfg.metrics;
  json doc = {
      {"schema_version", cfg.schema_version},
      {"grid_size", cfg.grid_size},
      {"terrain", std::string(to_string(cfg.terrain))},
      {"sea_level", cfg.sea_level},
      {"roughness", cfg.roughness},
      {"relief", cfg.relief},
      {"sensors", std::string(to_string(cfg.sensors))},
      {"attack_enabled", cfg.attack_enabled},
      {"max_population", cfg.max_population},
      {"initial_population", cfg.initial_population},
      {"steps", cfg.steps},
      {"seed", cfg.seed},
      {"resources",
       {{"rest", cost_json(r.rest)},
        {"move", cost_json(r.move)},
        {"attack", cost_json(r.attack)},
        {"eat", cost_json(r.eat)},
        {"reproduce", cost_json(r.reproduce)},
        {"eat_amount", r.eat_amount},
        {"stomach_capacity", r.stomach_capacity},
        {"base_biomass", r.base_biomass},
        {"child_energy", r.child_energy},
        {"child_water", r.child_water},
        {"energy_growth_rate", r.energy_growth_rate},
        {"energy_cap", r.energy_cap},
        {"flow_rate", r.flow_rate},
        {"biomass_per_cell", r.biomass_per_cell},
        {"energy_per_cell", r.energy_per_cell},
        {"scatter_quantum", r.scatter_quantum},
        {"initial_store_fraction", r.initial_store_fraction}}},
      {"health",
       {{"max_hp", h.max_hp},
        {"starvation_damage", h.starvation_damage},
        {"recovery_rate", h.recovery_rate},
        {"age_onset", h.age_onset},
        {"age_slope", h.age_slope},
        {"heal_threshold", h.heal_threshold},
        {"heal_energy", h.heal_energy},
        {"heal_water", h.heal_water}}},
      {"policy",
       {{"hidden_width", p.hidden_width},
        {"mutation_std", p.mutation_std},
        {"min_temperature", p.min_temperature},
        {"max_temperature", p.max_temperature},
        {"action_count", p.action_count}}},
      {"sensing",
       {{"age_scale", s.age_scale},
        {"elevation_scale", s.elevation_scale},
        {"water_scale", s.water_scale},
        {"energy_scale", s.energy_scale},
        {"biomass_scale", s.biomass_scale},
        {"land_gray_min", s.land_gray_min},
        {"land_gray_gain", s.land_gray_gain},
        {"water_blue_min", s.water_blue_min},
        {"water_blue_gain", s.water_blue_gain},
        {"energy_tint", s.energy_tint},
        {"biomass_tint", s.biomass_tint}}},
      {"metrics",
       {{"every", m.every},
        {"smoothing_window", m.smoothing_window},
        {"dry_threshold", m.dry_threshold},
        {"mining_threshold", m.mining_threshold},
        {"onset_rounding", m.onset_rounding},
        {"heartbeat_every", m.heartbeat_every}}},
  };
  return doc.dump(2);
}

std::string configuration_label(const SimConfig& cfg) {
  std::string sensors(to_string(cfg.sensors));
  for (auto& c : sensors) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return std::string(to_string(cfg.terrain)) + "_" + sensors + (cfg.attack_enabled ? "_attack" : "") +
         "_" + std::to_string(cfg.grid_size);
}

}  // namespace ecosim
