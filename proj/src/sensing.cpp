#include "ecosim/sensing.hpp"

#include <algorithm>
#include <stdexcept>

#include "ecosim/policy.hpp"

namespace ecosim {

namespace {

constexpr double kRockColorScale = 2.0 * kUnitsPerHeight;
// Water shallower than this blends with the land colour underneath.
constexpr double kShallowDepth = 64.0;

float unit_clamp(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

/// Maps [0, scale] onto [-1, 1], saturating above scale.
float signed_fraction(double value, double scale) {
  return static_cast<float>(2.0 * std::clamp(value / scale, 0.0, 1.0) - 1.0);
}

void require_live(const WorldState& world, std::uint32_t slot) {
  if (slot >= world.agents.capacity() || !world.agents[slot].alive) {
    throw std::invalid_argument("agent slot " + std::to_string(slot) + " is not alive");
  }
}

void render_patch_into(const WorldState& world, std::uint32_t slot, const SimConfig& cfg,
                       float* out) {
  const auto& map = world.map;
  const auto& agent = world.agents[slot];
  const GridPos fwd = facing_vector(agent.facing);
  const GridPos right = right_vector(agent.facing);
  const std::size_t self = map.index(agent.pos);
  const double self_height = static_cast<double>(map.rock[self]) + map.water[self];
  const double elevation_scale = cfg.sensing.elevation_scale * kUnitsPerHeight;
  constexpr int half = kVisionSide / 2;
  for (int row = 0; row < kVisionSide; ++row) {
    for (int col = 0; col < kVisionSide; ++col) {
      const GridPos cell = agent.pos + (half - row) * fwd + (col - half) * right;
      float* px = out + (static_cast<std::size_t>(row) * kVisionSide + col) * kVisionChannels;
      if (!map.in_bounds(cell)) {
        px[0] = kWallColor[0];
        px[1] = kWallColor[1];
        px[2] = kWallColor[2];
        px[3] = 1.0f;
        continue;
      }
      const std::size_t idx = map.index(cell);
      const Rgb rgb = rendered_color(world, idx, cfg.sensing);
      px[0] = rgb[0];
      px[1] = rgb[1];
      px[2] = rgb[2];
      const double height = static_cast<double>(map.rock[idx]) + map.water[idx];
      px[3] = static_cast<float>(std::clamp((height - self_height) / elevation_scale, -1.0, 1.0));
    }
  }
}

void write_internal_external(const WorldState& world, std::uint32_t slot, const SimConfig& cfg,
                             float* internal, float* external) {
  const auto& agent = world.agents[slot];
  const double capacity = cfg.resources.stomach_capacity;
  internal[0] = signed_fraction(agent.age, cfg.sensing.age_scale);
  internal[1] = signed_fraction(agent.hp, cfg.health.max_hp);
  internal[2] = signed_fraction(agent.store_water, capacity);
  internal[3] = signed_fraction(agent.store_energy, capacity);
  internal[4] = signed_fraction(agent.store_biomass, capacity);
  const std::size_t cell = world.map.index(agent.pos);
  external[0] = signed_fraction(world.map.water[cell], cfg.sensing.water_scale);
  external[1] = signed_fraction(world.map.energy[cell], cfg.sensing.energy_scale);
  external[2] = signed_fraction(world.map.biomass[cell], cfg.sensing.biomass_scale);
}

}  // namespace

std::vector<float> Observation::flatten() const {
  std::vector<float> flat;
  flat.reserve(size());
  flat.insert(flat.end(), internal.begin(), internal.end());
  flat.insert(flat.end(), external.begin(), external.end());
  flat.insert(flat.end(), compass.begin(), compass.end());
  flat.insert(flat.end(), vision.begin(), vision.end());
  return flat;
}

Rgb cell_color(const GridLayers& map, std::size_t cell, const SensingConfig& palette) {
  const double gray = palette.land_gray_min + palette.land_gray_gain * unit_clamp(map.rock[cell] / kRockColorScale);
  const double depth = map.water[cell];
  const double wet = unit_clamp(depth / kShallowDepth);
  const double blue = palette.water_blue_min +
                      palette.water_blue_gain * unit_clamp(depth / palette.water_scale);
  double r = gray * (1.0 - wet) + 0.05 * wet;
  double g = gray * (1.0 - wet) + 0.2 * wet;
  double b = gray * (1.0 - wet) + blue * wet;
  const double energy = unit_clamp(static_cast<double>(map.energy[cell]) / palette.energy_scale);
  const double biomass = unit_clamp(static_cast<double>(map.biomass[cell]) / palette.biomass_scale);
  r += palette.biomass_tint * biomass;
  g += palette.energy_tint * energy + palette.biomass_tint * biomass;
  return {unit_clamp(r), unit_clamp(g), unit_clamp(b)};
}

Rgb rendered_color(const WorldState& world, std::size_t cell, const SensingConfig& palette) {
  const std::int32_t occupant = world.map.occupancy[cell];
  if (occupant != kEmptyCell) return world.agents[static_cast<std::uint32_t>(occupant)].color;
  return cell_color(world.map, cell, palette);
}

std::vector<float> render_vision_patch(const WorldState& world, std::uint32_t slot,
                                       const SimConfig& cfg) {
  if (cfg.sensors != SensorSet::RCV) throw std::invalid_argument("vision sensor is disabled");
  require_live(world, slot);
  std::vector<float> patch(kVisionWidth);
  render_patch_into(world, slot, cfg, patch.data());
  return patch;
}

int observation_width(SensorSet sensors) {
  int width = kInternalWidth + kExternalWidth;
  if (sensors != SensorSet::R) width += kCompassWidth;
  if (sensors == SensorSet::RCV) width += kVisionWidth;
  return width;
}

Observation build_observation(const WorldState& world, std::uint32_t slot, const SimConfig& cfg) {
  require_live(world, slot);
  Observation obs;
  write_internal_external(world, slot, cfg, obs.internal.data(), obs.external.data());
  if (cfg.sensors != SensorSet::R) {
    obs.compass.assign(kCompassWidth, 0.0f);
    obs.compass[static_cast<std::size_t>(world.agents[slot].facing)] = 1.0f;
  }
  if (cfg.sensors == SensorSet::RCV) obs.vision = render_vision_patch(world, slot, cfg);
  return obs;
}

void write_observation(const WorldState& world, std::uint32_t slot, const SimConfig& cfg,
                       std::span<float> out) {
  if (out.size() != static_cast<std::size_t>(observation_width(cfg.sensors))) {
    throw std::invalid_argument("observation buffer has the wrong width");
  }
  float* p = out.data();
  write_internal_external(world, slot, cfg, p, p + kInternalWidth);
  p += kInternalWidth + kExternalWidth;
  if (cfg.sensors != SensorSet::R) {
    std::fill(p, p + kCompassWidth, 0.0f);
    p[static_cast<int>(world.agents[slot].facing)] = 1.0f;
    p += kCompassWidth;
  }
  if (cfg.sensors == SensorSet::RCV) render_patch_into(world, slot, cfg, p);
}

}  // namespace ecosim
