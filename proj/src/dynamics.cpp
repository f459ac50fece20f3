#include "ecosim/dynamics.hpp"

#include <algorithm>
#include <stdexcept>

#include "ecosim/parallel.hpp"
#include "ecosim/rng.hpp"

namespace ecosim {

StepTrace& StepTrace::operator+=(const StepTrace& other) {
  live_at_start += other.live_at_start;
  births += other.births;
  deaths_attack += other.deaths_attack;
  deaths_starvation += other.deaths_starvation;
  deaths_age += other.deaths_age;
  attacks += other.attacks;
  kills += other.kills;
  canceled_moves += other.canceled_moves;
  for (int i = 0; i < kActionKinds; ++i) actions[i] += other.actions[i];
  return *this;
}

void StepScratch::reset(std::uint32_t capacity, std::size_t cells) {
  killer.assign(capacity, -1);
  starved.assign(capacity, 0);
  if (claims.size() != cells) claims.assign(cells, 0);
}

ActionCost action_cost(Action action, const ResourceConfig& res) {
  switch (action) {
    case Action::Rest: return res.rest;
    case Action::TurnCW:
    case Action::TurnCCW:
    case Action::Forward: return res.move;
    case Action::Attack: return res.attack;
    case Action::EatWater:
    case Action::EatEnergy:
    case Action::EatBiomass: return res.eat;
    case Action::Reproduce: return res.reproduce;
  }
  return res.rest;
}

std::vector<GridPos> attack_footprint(const GridLayers& map, GridPos pos, Orientation facing) {
  const GridPos fwd = facing_vector(facing);
  const GridPos right = right_vector(facing);
  std::vector<GridPos> cells;
  cells.reserve(9);
  for (int depth = 1; depth <= 3; ++depth) {
    for (int lateral = -1; lateral <= 1; ++lateral) {
      const GridPos cell = pos + depth * fwd + lateral * right;
      if (map.in_bounds(cell)) cells.push_back(cell);
    }
  }
  return cells;
}

std::vector<Kill> resolve_attacks(WorldState& world, std::span<const ActionIntent> intents,
                                  StepScratch& scratch, StepTrace& trace) {
  std::vector<Kill> kills;
  // Victims are collected against start-of-step state before any hp changes,
  // so an attacker that is itself killed still lands its attack.
  for (const auto& intent : intents) {
    if (intent.action != Action::Attack) continue;
    ++trace.attacks;
    const auto& attacker = world.agents[intent.agent];
    for (const GridPos cell : attack_footprint(world.map, attacker.pos, attacker.facing)) {
      const std::int32_t victim = world.map.occupancy[world.map.index(cell)];
      if (victim == kEmptyCell) continue;
      const auto v = static_cast<std::uint32_t>(victim);
      // Ascending attacker order means the first claim is the lowest slot.
      if (scratch.killer[v] >= 0) continue;
      scratch.killer[v] = static_cast<std::int32_t>(intent.agent);
      kills.push_back({v, intent.agent});
    }
  }
  for (const auto& kill : kills) world.agents[kill.victim].hp = 0.0f;
  trace.kills += static_cast<std::uint32_t>(kills.size());
  return kills;
}

void resolve_eats(WorldState& world, std::span<const ActionIntent> intents, const SimConfig& cfg,
                  const StepScratch& scratch) {
  const auto& res = cfg.resources;
  for (const auto& intent : intents) {
    std::vector<std::int32_t>* layer = nullptr;
    auto& agent = world.agents[intent.agent];
    std::int32_t* store = nullptr;
    switch (intent.action) {
      case Action::EatWater:
        layer = &world.map.water;
        store = &agent.store_water;
        break;
      case Action::EatEnergy:
        layer = &world.map.energy;
        store = &agent.store_energy;
        break;
      case Action::EatBiomass:
        layer = &world.map.biomass;
        store = &agent.store_biomass;
        break;
      default: continue;
    }
    if (scratch.killed(intent.agent)) continue;
    auto& cell = (*layer)[world.map.index(agent.pos)];
    const std::int32_t amount =
        std::max(0, std::min({res.eat_amount, cell, res.stomach_capacity - *store}));
    cell -= amount;
    *store += amount;
  }
}

void resolve_moves(WorldState& world, std::span<const ActionIntent> intents, StepScratch& scratch,
                   StepTrace& trace) {
  auto& map = world.map;
  std::vector<std::pair<std::uint32_t, std::size_t>> movers;
  for (const auto& intent : intents) {
    if (scratch.killed(intent.agent)) continue;
    auto& agent = world.agents[intent.agent];
    if (intent.action == Action::TurnCW) {
      agent.facing = turn_cw(agent.facing);
    } else if (intent.action == Action::TurnCCW) {
      agent.facing = turn_ccw(agent.facing);
    } else if (intent.action == Action::Forward) {
      const GridPos target = agent.pos + facing_vector(agent.facing);
      if (!map.in_bounds(target) || map.occupancy[map.index(target)] != kEmptyCell) {
        ++trace.canceled_moves;
        continue;
      }
      const std::size_t cell = map.index(target);
      if (scratch.claims[cell] < 2) ++scratch.claims[cell];
      movers.emplace_back(intent.agent, cell);
    }
  }
  for (const auto& [slot, cell] : movers) {
    if (scratch.claims[cell] == 1) {
      auto& agent = world.agents[slot];
      map.occupancy[map.index(agent.pos)] = kEmptyCell;
      map.occupancy[cell] = static_cast<std::int32_t>(slot);
      agent.pos = {static_cast<int>(cell % static_cast<std::size_t>(map.size)),
                   static_cast<int>(cell / static_cast<std::size_t>(map.size))};
    } else {
      ++trace.canceled_moves;
    }
  }
  for (const auto& mover : movers) scratch.claims[mover.second] = 0;
}

std::vector<Birth> resolve_reproduction(WorldState& world, std::span<const ActionIntent> intents,
                                        PolicyPool& pool, const SimConfig& cfg,
                                        const StepScratch& scratch, StepTrace& trace,
                                        WorkerPool* workers) {
  const auto& res = cfg.resources;
  auto& map = world.map;
  std::vector<Birth> births;
  for (const auto& intent : intents) {
    if (intent.action != Action::Reproduce || scratch.killed(intent.agent)) continue;
    if (!world.agents.has_free_slot()) continue;
    const auto& parent = world.agents[intent.agent];
    if (parent.store_biomass < res.base_biomass ||
        parent.store_energy < res.child_energy + res.reproduce.energy ||
        parent.store_water < res.child_water + res.reproduce.water) {
      continue;
    }
    const GridPos behind = parent.pos - facing_vector(parent.facing);
    if (!map.in_bounds(behind) || map.occupancy[map.index(behind)] != kEmptyCell) continue;

    const std::uint32_t child_slot = world.agents.allocate();
    // allocate() may not invalidate `parent`: slots live in a fixed vector.
    auto& p = world.agents[intent.agent];
    auto& child = world.agents[child_slot];
    p.store_biomass -= res.base_biomass;
    p.store_energy -= res.child_energy;
    p.store_water -= res.child_water;
    child.pos = behind;
    child.facing = p.facing;
    child.hp = cfg.health.max_hp;
    child.age = 0;
    child.store_energy = res.child_energy;
    child.store_water = res.child_water;
    child.store_biomass = 0;
    child.uid = world.agents.next_uid++;
    child.parent = p.uid;
    child.birth_step = world.step;
    map.occupancy[map.index(behind)] = static_cast<std::int32_t>(child_slot);
    births.push_back({child_slot, intent.agent});
  }
  trace.births += static_cast<std::uint32_t>(births.size());

  const MutationSettings settings = MutationSettings::from(cfg.policy);
  const auto mutate_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Birth& b = births[i];
      CounterRng noise(world.seed, world.step, Stream::Mutation, b.child);
      mutate(pool.weights(b.parent), pool.log_temperature(b.parent), pool.weights(b.child),
             pool.log_temperature(b.child), settings, noise);
      auto& child = world.agents[b.child];
      child.color = mutate_color(world.agents[b.parent].color, settings.std, noise);
    }
  };
  if (workers != nullptr) {
    workers->parallel_for(births.size(), mutate_range);
  } else {
    mutate_range(0, births.size());
  }
  return births;
}

void apply_metabolism(WorldState& world, std::span<const ActionIntent> intents,
                      const SimConfig& cfg, StepScratch& scratch, WorkerPool* workers) {
  const auto& res = cfg.resources;
  const auto& health = cfg.health;
  const auto heal_floor = static_cast<double>(health.heal_threshold) * res.stomach_capacity;
  // Each acting agent stands on its own cell, so writes to the water layer
  // never collide across agents.
  const auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& intent = intents[i];
      if (scratch.killed(intent.agent)) continue;
      auto& agent = world.agents[intent.agent];
      auto& cell_water = world.map.water[world.map.index(agent.pos)];
      const ActionCost cost = action_cost(intent.action, res);
      bool starving = false;
      if (agent.store_energy >= cost.energy) {
        agent.store_energy -= cost.energy;
      } else {
        agent.store_energy = 0;
        starving = true;
      }
      const std::int32_t paid = std::min(agent.store_water, cost.water);
      agent.store_water -= paid;
      cell_water += paid;
      if (paid < cost.water) starving = true;
      if (starving) {
        agent.hp -= health.starvation_damage;
        scratch.starved[intent.agent] = 1;
      }
      if (agent.age > health.age_onset) {
        agent.hp -= static_cast<float>(agent.age - health.age_onset) * health.age_slope;
      }
      if (agent.hp > 0.0f && agent.hp < health.max_hp && agent.store_energy > heal_floor &&
          agent.store_water > heal_floor) {
        const std::int32_t heal_energy = std::min(agent.store_energy, health.heal_energy);
        const std::int32_t heal_water = std::min(agent.store_water, health.heal_water);
        agent.store_energy -= heal_energy;
        agent.store_water -= heal_water;
        cell_water += heal_water;
        agent.hp = std::min(health.max_hp, agent.hp + health.recovery_rate);
      }
      ++agent.age;
    }
  };
  if (workers != nullptr) {
    workers->parallel_for(intents.size(), run);
  } else {
    run(0, intents.size());
  }
}

std::vector<Death> process_deaths(WorldState& world, const SimConfig& cfg,
                                  const StepScratch& scratch, StepTrace& trace) {
  std::vector<Death> deaths;
  auto& map = world.map;
  for (std::uint32_t slot = 0; slot < world.agents.capacity(); ++slot) {
    auto& agent = world.agents[slot];
    if (!agent.alive || agent.hp > 0.0f) continue;
    DeathCause cause = DeathCause::Age;
    if (scratch.killed(slot)) {
      cause = DeathCause::Attack;
      ++trace.deaths_attack;
    } else if (scratch.starved[slot] != 0) {
      cause = DeathCause::Starvation;
      ++trace.deaths_starvation;
    } else {
      ++trace.deaths_age;
    }
    const std::size_t cell = map.index(agent.pos);
    map.biomass[cell] += agent.store_biomass + cfg.resources.base_biomass;
    map.energy[cell] += agent.store_energy;
    map.water[cell] += agent.store_water;
    map.occupancy[cell] = kEmptyCell;
    agent.store_biomass = 0;
    agent.store_energy = 0;
    agent.store_water = 0;
    world.agents.release(slot);
    deaths.push_back({slot, cause});
  }
  return deaths;
}

void grow_energy(GridLayers& map, const ResourceConfig& res, WorkerPool* workers) {
  const auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      if (map.biomass[c] > 0 && map.energy[c] < res.energy_cap) {
        map.energy[c] = std::min(res.energy_cap, map.energy[c] + res.energy_growth_rate);
      }
    }
  };
  if (workers != nullptr) {
    workers->parallel_for(map.cell_count(), run);
  } else {
    run(0, map.cell_count());
  }
}

}  // namespace ecosim
