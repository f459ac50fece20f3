#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ecosim/config.hpp"
#include "ecosim/policy.hpp"
#include "ecosim/world.hpp"

namespace ecosim {

class WorkerPool;

struct ActionIntent {
  std::uint32_t agent = 0;
  Action action = Action::Rest;
};

enum class DeathCause : std::uint8_t { Attack, Starvation, Age };

/// Per-step event counts.
struct StepTrace {
  std::uint32_t live_at_start = 0;
  std::uint32_t births = 0;
  std::uint32_t deaths_attack = 0;
  std::uint32_t deaths_starvation = 0;
  std::uint32_t deaths_age = 0;
  std::uint32_t attacks = 0;
  std::uint32_t kills = 0;
  std::uint32_t canceled_moves = 0;
  std::array<std::uint32_t, kActionKinds> actions{};

  [[nodiscard]] std::uint32_t deaths() const {
    return deaths_attack + deaths_starvation + deaths_age;
  }
  StepTrace& operator+=(const StepTrace& other);
};

/// Slot-indexed bookkeeping shared by the resolvers within one step.
struct StepScratch {
  /// Slot of the attacker credited with killing this agent, or -1.
  std::vector<std::int32_t> killer;
  /// Set when metabolism found a required store insufficient this step.
  std::vector<std::uint8_t> starved;
  /// Forward claims per cell; only touched entries are non-zero between steps.
  std::vector<std::uint8_t> claims;

  void reset(std::uint32_t capacity, std::size_t cells);
  [[nodiscard]] bool killed(std::uint32_t slot) const { return killer[slot] >= 0; }
};

struct Kill {
  std::uint32_t victim = 0;
  std::uint32_t attacker = 0;
};

struct Birth {
  std::uint32_t child = 0;
  std::uint32_t parent = 0;
};

struct Death {
  std::uint32_t slot = 0;
  DeathCause cause = DeathCause::Age;
};

ActionCost action_cost(Action action, const ResourceConfig& res);

/// The nine cells hit by an attack: depth 1..3 ahead, lateral -1..+1.
/// Out-of-bounds cells are omitted.
std::vector<GridPos> attack_footprint(const GridLayers& map, GridPos pos, Orientation facing);

/// Marks every live agent in an attacker's footprint as killed (hp 0).
/// A victim hit by several attackers is credited to the lowest slot.
/// `intents` must be sorted by agent slot.
std::vector<Kill> resolve_attacks(WorldState& world, std::span<const ActionIntent> intents,
                                  StepScratch& scratch, StepTrace& trace);

/// Moves min(eat_amount, cell amount, free stomach) from the agent's cell.
void resolve_eats(WorldState& world, std::span<const ActionIntent> intents, const SimConfig& cfg,
                  const StepScratch& scratch);

/// Applies turns, then forward moves against start-of-step occupancy.
/// Moves into occupied, contested or off-map cells are canceled.
void resolve_moves(WorldState& world, std::span<const ActionIntent> intents, StepScratch& scratch,
                   StepTrace& trace);

/// Creates children directly behind successful parents, in ascending parent
/// slot. Children take the lowest free slots and a mutated copy of the
/// parent's policy and colour.
std::vector<Birth> resolve_reproduction(WorldState& world, std::span<const ActionIntent> intents,
                                        PolicyPool& pool, const SimConfig& cfg,
                                        const StepScratch& scratch, StepTrace& trace,
                                        WorkerPool* workers = nullptr);

/// Action cost, starvation, age damage, healing and ageing for each acting agent.
void apply_metabolism(WorldState& world, std::span<const ActionIntent> intents,
                      const SimConfig& cfg, StepScratch& scratch, WorkerPool* workers = nullptr);

/// Removes agents with hp <= 0 and returns their body and stores to their
/// cell. Cause precedence is attack > starvation > age.
std::vector<Death> process_deaths(WorldState& world, const SimConfig& cfg,
                                  const StepScratch& scratch, StepTrace& trace);

/// Energy regrows on every cell holding biomass, up to energy_cap.
void grow_energy(GridLayers& map, const ResourceConfig& res, WorkerPool* workers = nullptr);

}  // namespace ecosim
