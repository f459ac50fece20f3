#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ecosim/config.hpp"
#include "ecosim/world.hpp"

namespace ecosim {

/// One agent's sensor readings. Absent sensors have zero length.
struct Observation {
  std::array<float, 5> internal{};
  std::array<float, 3> external{};
  std::vector<float> compass;
  std::vector<float> vision;

  /// Concatenation in encoder order: internal, external, compass, vision.
  [[nodiscard]] std::vector<float> flatten() const;
  [[nodiscard]] std::size_t size() const { return 8 + compass.size() + vision.size(); }
};

using Rgb = std::array<float, 3>;

/// Terrain and resource colour of one cell, ignoring agents.
Rgb cell_color(const GridLayers& map, std::size_t cell, const SensingConfig& palette);
/// As cell_color, but overdrawn by the occupying agent's colour trait.
Rgb rendered_color(const WorldState& world, std::size_t cell, const SensingConfig& palette);

inline constexpr Rgb kWallColor = {0.5f, 0.0f, 0.5f};

/// Egocentric 7x7x4 patch, [row][col][channel] flattened. Row 0 is farthest
/// ahead; the agent sits at row 3, col 3 and columns grow to its right.
/// Channels: R, G, B, clamp(elevation difference / elevation_scale, -1, 1).
/// Throws std::invalid_argument when the sensor set has no vision.
std::vector<float> render_vision_patch(const WorldState& world, std::uint32_t slot,
                                       const SimConfig& cfg);

/// Throws std::invalid_argument for dead or out-of-range agents.
Observation build_observation(const WorldState& world, std::uint32_t slot, const SimConfig& cfg);

/// Hot-path variant writing the flattened observation straight into `out`,
/// which must have the policy input width.
void write_observation(const WorldState& world, std::uint32_t slot, const SimConfig& cfg,
                       std::span<float> out);

/// Observation width for a sensor set.
int observation_width(SensorSet sensors);

}  // namespace ecosim
