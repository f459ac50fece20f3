#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecosim/config.hpp"
#include "ecosim/metrics.hpp"
#include "ecosim/policy.hpp"
#include "ecosim/world.hpp"

namespace ecosim {

// ---- configuration files --------------------------------------------------

/// Parses a JSON config. Keys mirror SimConfig; an optional "preset" key
/// selects a bundled preset that the remaining keys override. Unknown keys,
/// type errors and schema mismatches throw ConfigError naming the field.
SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const SimConfig& cfg);

/// Short label such as "beach_rc_64" or "ocean_rcv_attack_128".
std::string configuration_label(const SimConfig& cfg);

// ---- snapshots ------------------------------------------------------------

inline constexpr std::uint32_t kSnapshotVersion = 1;

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Snapshot {
  SimConfig config;
  WorldState world;
  PolicyPool pool;
};

/// Binary, little-endian: "ECOS", version, config JSON, step, RNG key,
/// layers, live agents, live policies (brain-float), conservation totals,
/// trailing FNV-1a 64 checksum over all preceding bytes.
std::vector<std::uint8_t> encode_snapshot(const SimConfig& cfg, const WorldState& world,
                                          const PolicyPool& pool);
Snapshot decode_snapshot(std::span<const std::uint8_t> bytes);
void save_snapshot(const std::filesystem::path& path, const SimConfig& cfg,
                   const WorldState& world, const PolicyPool& pool);
Snapshot load_snapshot(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

// ---- images ----------------------------------------------------------------

/// Full-map RGB8 render, row-major, using the sensing palette; agents drawn
/// with their colour trait.
std::vector<std::uint8_t> render_map_pixels(const WorldState& world, const SimConfig& cfg);
void render_map_image(const WorldState& world, const SimConfig& cfg,
                      const std::filesystem::path& path);
/// Rock heightfield as 16-bit grayscale in raw fixed-point height units.
void write_heightmap_png(const GridLayers& map, const std::filesystem::path& path);

void write_png_rgb8(const std::filesystem::path& path, int width, int height,
                    std::span<const std::uint8_t> rgb);
void write_png_gray16(const std::filesystem::path& path, int width, int height,
                      std::span<const std::uint16_t> gray);

// ---- metrics files ----------------------------------------------------------

inline constexpr int kMetricsCsvVersion = 1;

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRecord& rec);
void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRecord> records);
/// Throws std::runtime_error when the header does not match this version.
std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path);

std::string event_report_json(const EventReport& report, const std::string& configuration,
                              std::uint64_t seed);

}  // namespace ecosim
