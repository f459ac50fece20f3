#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ecosim/config.hpp"
#include "ecosim/rng.hpp"

namespace ecosim {

class WorkerPool;

/// Parameters of one procedurally generated terrain. Heights are in height
/// units; rock is stored as fixed point with kUnitsPerHeight per unit.
struct TerrainSpec {
  TerrainKind kind = TerrainKind::Beach;
  double roughness = 0.1;
  double sea_level = 1.0;
  /// Amplitude of the macro shape around sea level.
  double relief = 0.75;
  std::uint64_t noise_seed = 0;
};

TerrainSpec terrain_spec_for(const SimConfig& cfg);

std::int32_t height_to_units(double height);

/// Multi-octave value noise in [-1, 1] sampled on a size x size grid.
std::vector<double> value_noise(std::uint64_t seed, int size, int octaves = 4);

/// Rock heightfield (row-major, y * size + x) realising the macro shape of
/// spec.kind. Pure function of (spec, size). Throws std::invalid_argument for
/// size < 16.
std::vector<std::int32_t> generate_rock(const TerrainSpec& spec, int size);

/// water = max(0, sea_level - rock) per cell, in fixed-point units.
std::vector<std::int32_t> init_water(std::span<const std::int32_t> rock, double sea_level);

/// Per-tick working buffers for flow_water_tick.
struct FlowScratch {
  std::vector<std::int32_t> outflow;
  std::vector<std::int8_t> direction;
};

/// One tick of the discrete downhill flow. Each cell donates
/// min(water, flow_rate, (h - h_low) / 2) to its lowest strictly-lower
/// 4-neighbour, where h = rock + water. Transfers are computed from the
/// pre-tick state and applied simultaneously. Map edges are walls.
void flow_water_tick(int size, std::span<const std::int32_t> rock, std::span<std::int32_t> water,
                     std::int32_t flow_rate, FlowScratch& scratch, WorkerPool* pool = nullptr);

/// Scatters `amount` units over the layer in quanta of `quantum` units, each
/// placed on a uniformly random cell; the remainder goes to one more random
/// cell. Adds exactly `amount` to the layer total.
void seed_resources(std::span<std::int32_t> layer, Units amount, std::int32_t quantum,
                    CounterRng& rng);

}  // namespace ecosim
