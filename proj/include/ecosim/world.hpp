#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "ecosim/config.hpp"

namespace ecosim {

class PolicyPool;

enum class Orientation : std::uint8_t { N = 0, E = 1, S = 2, W = 3 };

struct GridPos {
  int x = 0;
  int y = 0;
  friend bool operator==(const GridPos&, const GridPos&) = default;
};

/// Unit step for each orientation; y grows southwards.
GridPos facing_vector(Orientation o);
/// Facing vector of the orientation one clockwise turn away (agent's right).
GridPos right_vector(Orientation o);
Orientation turn_cw(Orientation o);
Orientation turn_ccw(Orientation o);

inline GridPos operator+(GridPos a, GridPos b) { return {a.x + b.x, a.y + b.y}; }
inline GridPos operator-(GridPos a, GridPos b) { return {a.x - b.x, a.y - b.y}; }
inline GridPos operator*(int k, GridPos a) { return {k * a.x, k * a.y}; }

inline constexpr std::int32_t kEmptyCell = -1;
inline constexpr std::uint64_t kNoParent = std::numeric_limits<std::uint64_t>::max();

/// Map state. Every layer is row-major (y * size + x). Rock is in
/// 1/kUnitsPerHeight height units, resources in fixed-point units.
struct GridLayers {
  int size = 0;
  std::vector<std::int32_t> rock;
  std::vector<std::int32_t> water;
  std::vector<std::int32_t> energy;
  std::vector<std::int32_t> biomass;
  /// Slot index of the agent standing on the cell, or kEmptyCell.
  std::vector<std::int32_t> occupancy;

  [[nodiscard]] bool in_bounds(GridPos p) const {
    return p.x >= 0 && p.y >= 0 && p.x < size && p.y < size;
  }
  [[nodiscard]] std::size_t index(GridPos p) const {
    return static_cast<std::size_t>(p.y) * static_cast<std::size_t>(size) +
           static_cast<std::size_t>(p.x);
  }
  [[nodiscard]] std::size_t cell_count() const {
    return static_cast<std::size_t>(size) * static_cast<std::size_t>(size);
  }
};

struct AgentRecord {
  bool alive = false;
  GridPos pos;
  Orientation facing = Orientation::N;
  float hp = 0.0f;
  std::uint32_t age = 0;
  std::int32_t store_water = 0;
  std::int32_t store_energy = 0;
  std::int32_t store_biomass = 0;
  std::array<float, 3> color{};
  /// Lineage identity; slots are reused, uids never are.
  std::uint64_t uid = 0;
  std::uint64_t parent = kNoParent;
  std::uint64_t birth_step = 0;
};

/// Fixed array of agent slots. The slot index is the agent's id for ordering
/// and its handle into the policy pool.
class AgentTable {
 public:
  AgentTable() = default;
  explicit AgentTable(std::uint32_t capacity);

  [[nodiscard]] std::uint32_t capacity() const { return static_cast<std::uint32_t>(slots_.size()); }
  [[nodiscard]] std::uint32_t live_count() const { return live_count_; }
  [[nodiscard]] bool has_free_slot() const { return !free_.empty(); }

  AgentRecord& operator[](std::uint32_t slot) { return slots_[slot]; }
  const AgentRecord& operator[](std::uint32_t slot) const { return slots_[slot]; }
  [[nodiscard]] const std::vector<AgentRecord>& slots() const { return slots_; }

  /// Claims the lowest free slot and marks it alive. Requires has_free_slot().
  std::uint32_t allocate();
  /// Marks a slot dead and returns it to the free list.
  void release(std::uint32_t slot);

  /// Ascending slot indices of live agents.
  [[nodiscard]] std::vector<std::uint32_t> live_slots() const;

  std::uint64_t next_uid = 1;

  /// Rebuilds the free list and live count from the alive flags (snapshot load).
  void rebuild_free_list();
  /// Free list in claim order (lowest slot first).
  [[nodiscard]] std::vector<std::uint32_t> free_slots() const;

 private:
  std::vector<AgentRecord> slots_;
  // Kept sorted descending so back() is the lowest free slot.
  std::vector<std::uint32_t> free_;
  std::uint32_t live_count_ = 0;
};

/// Conservation references recorded when the world is built.
struct ConservedTotals {
  Units biomass = 0;
  Units water = 0;
  friend bool operator==(const ConservedTotals&, const ConservedTotals&) = default;
};

struct WorldState {
  std::uint64_t step = 0;
  /// Counter-based RNG key; together with `step` it is the full RNG state.
  std::uint64_t seed = 0;
  GridLayers map;
  AgentTable agents;
  ConservedTotals reference;
};

/// Sums of the conserved quantities over map layers and agents.
ConservedTotals measure_totals(const WorldState& world, const SimConfig& cfg);
/// Sum of the energy layer and agent energy stores.
Units total_energy(const WorldState& world);

/// Builds the step-0 world: terrain, water, starting population and
/// resources. Policies for the starting population are Kaiming-initialised
/// into `pool`, which must be sized for cfg.max_population.
/// Throws std::runtime_error if the population does not fit.
WorldState init_world(const SimConfig& cfg, PolicyPool& pool);

/// Throws std::logic_error describing the first broken world invariant
/// (conservation, occupancy bijection, store and HP bounds).
void check_invariants(const WorldState& world, const SimConfig& cfg);

}  // namespace ecosim
