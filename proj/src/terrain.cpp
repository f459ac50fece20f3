#include "ecosim/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ecosim/parallel.hpp"

namespace ecosim {

namespace {

constexpr int kDirX[4] = {0, 1, 0, -1};
constexpr int kDirY[4] = {-1, 0, 1, 0};

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

/// Macro shape in [-1, 1]: positive is land, negative is water.
double macro_shape(TerrainKind kind, double u, double v) {
  const double du = u - 0.5;
  const double dv = v - 0.5;
  const double radial = std::sqrt(du * du + dv * dv) * 2.0;
  double shape = 0.0;
  switch (kind) {
    case TerrainKind::Ocean: shape = -0.5; break;
    case TerrainKind::Beach: shape = 2.0 * u - 1.0; break;
    case TerrainKind::Island: shape = 1.0 - 2.0 * radial; break;
    case TerrainKind::Lake: shape = 2.0 * radial - 1.0; break;
    case TerrainKind::Isthmus: shape = 1.0 - 6.0 * std::abs(du); break;
    case TerrainKind::Channel: shape = 6.0 * std::abs(dv) - 1.0; break;
  }
  return std::clamp(shape, -1.0, 1.0);
}

}  // namespace

TerrainSpec terrain_spec_for(const SimConfig& cfg) {
  return TerrainSpec{cfg.terrain, cfg.roughness, cfg.sea_level, cfg.relief, cfg.seed};
}

std::int32_t height_to_units(double height) {
  return static_cast<std::int32_t>(std::lround(height * kUnitsPerHeight));
}

std::vector<double> value_noise(std::uint64_t seed, int size, int octaves) {
  std::vector<double> out(static_cast<std::size_t>(size) * size, 0.0);
  double amplitude = 1.0;
  double total_amplitude = 0.0;
  for (int octave = 0; octave < octaves; ++octave) {
    const int lattice = std::min(size, 4 << octave);
    const int stride = lattice + 1;
    std::vector<double> values(static_cast<std::size_t>(stride) * stride);
    for (int i = 0; i < stride * stride; ++i) {
      CounterRng rng(seed, static_cast<std::uint64_t>(octave), Stream::Terrain,
                     static_cast<std::uint32_t>(i));
      values[static_cast<std::size_t>(i)] = rng.uniform() * 2.0 - 1.0;
    }
    const double cell = static_cast<double>(size) / lattice;
    for (int y = 0; y < size; ++y) {
      const double fy = (y + 0.5) / cell;
      const int ly = std::min(static_cast<int>(fy), lattice - 1);
      const double ty = smoothstep(fy - ly);
      for (int x = 0; x < size; ++x) {
        const double fx = (x + 0.5) / cell;
        const int lx = std::min(static_cast<int>(fx), lattice - 1);
        const double tx = smoothstep(fx - lx);
        const auto at = [&](int ix, int iy) {
          return values[static_cast<std::size_t>(iy) * stride + static_cast<std::size_t>(ix)];
        };
        const double top = at(lx, ly) + (at(lx + 1, ly) - at(lx, ly)) * tx;
        const double bottom = at(lx, ly + 1) + (at(lx + 1, ly + 1) - at(lx, ly + 1)) * tx;
        out[static_cast<std::size_t>(y) * size + x] += amplitude * (top + (bottom - top) * ty);
      }
    }
    total_amplitude += amplitude;
    amplitude *= 0.5;
  }
  for (auto& v : out) v /= total_amplitude;
  return out;
}

std::vector<std::int32_t> generate_rock(const TerrainSpec& spec, int size) {
  if (size < 16) throw std::invalid_argument("terrain size must be at least 16");
  const std::vector<double> noise =
      spec.roughness > 0.0 ? value_noise(spec.noise_seed, size) : std::vector<double>{};
  const std::int32_t sea_units = height_to_units(spec.sea_level);
  std::vector<std::int32_t> rock(static_cast<std::size_t>(size) * size);
  for (int y = 0; y < size; ++y) {
    const double v = (y + 0.5) / size;
    for (int x = 0; x < size; ++x) {
      const double u = (x + 0.5) / size;
      const std::size_t idx = static_cast<std::size_t>(y) * size + x;
      double height = spec.sea_level + spec.relief * macro_shape(spec.kind, u, v);
      if (!noise.empty()) height += spec.roughness * noise[idx];
      std::int32_t units = std::max(0, height_to_units(height));
      if (spec.kind == TerrainKind::Ocean) units = std::min(units, sea_units - 1);
      rock[idx] = std::max(0, units);
    }
  }
  return rock;
}

std::vector<std::int32_t> init_water(std::span<const std::int32_t> rock, double sea_level) {
  const std::int32_t sea_units = height_to_units(sea_level);
  std::vector<std::int32_t> water(rock.size());
  std::transform(rock.begin(), rock.end(), water.begin(),
                 [sea_units](std::int32_t r) { return std::max(0, sea_units - r); });
  return water;
}

void flow_water_tick(int size, std::span<const std::int32_t> rock, std::span<std::int32_t> water,
                     std::int32_t flow_rate, FlowScratch& scratch, WorkerPool* pool) {
  const std::size_t cells = static_cast<std::size_t>(size) * size;
  scratch.outflow.assign(cells, 0);
  scratch.direction.assign(cells, -1);

  const auto plan_rows = [&](std::size_t row_begin, std::size_t row_end) {
    for (auto y = static_cast<int>(row_begin); y < static_cast<int>(row_end); ++y) {
      for (int x = 0; x < size; ++x) {
        const std::size_t c = static_cast<std::size_t>(y) * size + x;
        if (water[c] <= 0) continue;
        const std::int64_t h = static_cast<std::int64_t>(rock[c]) + water[c];
        std::int64_t lowest = h;
        int best = -1;
        for (int d = 0; d < 4; ++d) {
          const int nx = x + kDirX[d];
          const int ny = y + kDirY[d];
          if (nx < 0 || ny < 0 || nx >= size || ny >= size) continue;
          const std::size_t n = static_cast<std::size_t>(ny) * size + nx;
          const std::int64_t hn = static_cast<std::int64_t>(rock[n]) + water[n];
          if (hn < lowest) {
            lowest = hn;
            best = d;
          }
        }
        if (best < 0) continue;
        const std::int64_t amount =
            std::min<std::int64_t>({water[c], flow_rate, (h - lowest) / 2});
        if (amount <= 0) continue;
        scratch.outflow[c] = static_cast<std::int32_t>(amount);
        scratch.direction[c] = static_cast<std::int8_t>(best);
      }
    }
  };
  const auto apply_rows = [&](std::size_t row_begin, std::size_t row_end) {
    for (auto y = static_cast<int>(row_begin); y < static_cast<int>(row_end); ++y) {
      for (int x = 0; x < size; ++x) {
        const std::size_t c = static_cast<std::size_t>(y) * size + x;
        std::int32_t next = water[c] - scratch.outflow[c];
        for (int d = 0; d < 4; ++d) {
          const int nx = x + kDirX[d];
          const int ny = y + kDirY[d];
          if (nx < 0 || ny < 0 || nx >= size || ny >= size) continue;
          const std::size_t n = static_cast<std::size_t>(ny) * size + nx;
          // Neighbour n donates to us when its direction points back at c.
          if (scratch.direction[n] == (d + 2) % 4) next += scratch.outflow[n];
        }
        water[c] = next;
      }
    }
  };

  if (pool != nullptr) {
    pool->parallel_for(static_cast<std::size_t>(size), plan_rows);
  } else {
    plan_rows(0, static_cast<std::size_t>(size));
  }
  // apply_rows reads only scratch and its own cell, so rows stay independent.
  if (pool != nullptr) {
    pool->parallel_for(static_cast<std::size_t>(size), apply_rows);
  } else {
    apply_rows(0, static_cast<std::size_t>(size));
  }
}

void seed_resources(std::span<std::int32_t> layer, Units amount, std::int32_t quantum,
                    CounterRng& rng) {
  if (amount <= 0 || layer.empty()) return;
  const Units quanta = amount / quantum;
  const Units remainder = amount % quantum;
  for (Units i = 0; i < quanta; ++i) {
    layer[rng.below(layer.size())] += quantum;
  }
  if (remainder > 0) layer[rng.below(layer.size())] += static_cast<std::int32_t>(remainder);
}

}  // namespace ecosim
