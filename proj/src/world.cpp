#include "ecosim/world.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ecosim/policy.hpp"
#include "ecosim/rng.hpp"
#include "ecosim/terrain.hpp"

namespace ecosim {

GridPos facing_vector(Orientation o) {
  switch (o) {
    case Orientation::N: return {0, -1};
    case Orientation::E: return {1, 0};
    case Orientation::S: return {0, 1};
    case Orientation::W: return {-1, 0};
  }
  return {0, 0};
}

Orientation turn_cw(Orientation o) {
  return static_cast<Orientation>((static_cast<int>(o) + 1) % 4);
}

Orientation turn_ccw(Orientation o) {
  return static_cast<Orientation>((static_cast<int>(o) + 3) % 4);
}

GridPos right_vector(Orientation o) { return facing_vector(turn_cw(o)); }

AgentTable::AgentTable(std::uint32_t capacity) : slots_(capacity) { rebuild_free_list(); }

std::uint32_t AgentTable::allocate() {
  if (free_.empty()) throw std::logic_error("agent table is full");
  const std::uint32_t slot = free_.back();
  free_.pop_back();
  slots_[slot] = AgentRecord{};
  slots_[slot].alive = true;
  ++live_count_;
  return slot;
}

void AgentTable::release(std::uint32_t slot) {
  if (!slots_[slot].alive) throw std::logic_error("releasing a dead slot");
  slots_[slot].alive = false;
  --live_count_;
  // Insert keeping descending order.
  const auto pos = std::lower_bound(free_.begin(), free_.end(), slot, std::greater<>());
  free_.insert(pos, slot);
}

std::vector<std::uint32_t> AgentTable::live_slots() const {
  std::vector<std::uint32_t> live;
  live.reserve(live_count_);
  for (std::uint32_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].alive) live.push_back(i);
  }
  return live;
}

void AgentTable::rebuild_free_list() {
  free_.clear();
  live_count_ = 0;
  for (std::uint32_t i = static_cast<std::uint32_t>(slots_.size()); i-- > 0;) {
    if (slots_[i].alive) {
      ++live_count_;
    } else {
      free_.push_back(i);
    }
  }
}

std::vector<std::uint32_t> AgentTable::free_slots() const { return {free_.rbegin(), free_.rend()}; }

ConservedTotals measure_totals(const WorldState& world, const SimConfig& cfg) {
  ConservedTotals totals;
  totals.biomass = std::accumulate(world.map.biomass.begin(), world.map.biomass.end(), Units{0});
  totals.water = std::accumulate(world.map.water.begin(), world.map.water.end(), Units{0});
  for (const auto& agent : world.agents.slots()) {
    if (!agent.alive) continue;
    totals.biomass += agent.store_biomass + cfg.resources.base_biomass;
    totals.water += agent.store_water;
  }
  return totals;
}

Units total_energy(const WorldState& world) {
  Units total = std::accumulate(world.map.energy.begin(), world.map.energy.end(), Units{0});
  for (const auto& agent : world.agents.slots()) {
    if (agent.alive) total += agent.store_energy;
  }
  return total;
}

WorldState init_world(const SimConfig& cfg, PolicyPool& pool) {
  if (pool.capacity() < cfg.max_population) {
    throw std::invalid_argument("policy pool is smaller than max_population");
  }
  WorldState world;
  world.seed = cfg.seed;
  auto& map = world.map;
  map.size = cfg.grid_size;
  map.rock = generate_rock(terrain_spec_for(cfg), cfg.grid_size);
  map.water = init_water(map.rock, cfg.sea_level);
  map.energy.assign(map.cell_count(), 0);
  map.biomass.assign(map.cell_count(), 0);
  map.occupancy.assign(map.cell_count(), kEmptyCell);

  if (cfg.initial_population > map.cell_count()) {
    throw std::runtime_error("initial_population exceeds the number of cells");
  }
  world.agents = AgentTable(cfg.max_population);
  const auto& res = cfg.resources;
  const auto initial_store = static_cast<std::int32_t>(
      std::lround(res.initial_store_fraction * res.stomach_capacity));
  const Units held_biomass =
      static_cast<Units>(cfg.initial_population) * (res.base_biomass + initial_store);
  if (held_biomass > cfg.biomass_budget()) {
    throw std::runtime_error("biomass budget cannot cover the starting population");
  }

  CounterRng placement(cfg.seed, 0, Stream::Placement, 0);
  for (std::uint32_t i = 0; i < cfg.initial_population; ++i) {
    std::size_t cell = 0;
    do {
      cell = placement.below(map.cell_count());
    } while (map.occupancy[cell] != kEmptyCell);
    const std::uint32_t slot = world.agents.allocate();
    auto& agent = world.agents[slot];
    agent.pos = {static_cast<int>(cell % map.size), static_cast<int>(cell / map.size)};
    agent.facing = static_cast<Orientation>(placement.below(4));
    agent.hp = cfg.health.max_hp;
    agent.store_water = initial_store;
    agent.store_energy = initial_store;
    agent.store_biomass = initial_store;
    for (auto& c : agent.color) c = static_cast<float>(placement.uniform());
    agent.uid = world.agents.next_uid++;
    agent.birth_step = 0;
    map.occupancy[cell] = static_cast<std::int32_t>(slot);

    CounterRng policy_rng(cfg.seed, 0, Stream::PolicyInit, slot);
    init_policy(pool.arch(), pool.weights(slot), pool.log_temperature(slot), policy_rng);
  }

  CounterRng biomass_rng(cfg.seed, 0, Stream::Resources, 0);
  seed_resources(map.biomass, cfg.biomass_budget() - held_biomass, res.scatter_quantum,
                 biomass_rng);
  CounterRng energy_rng(cfg.seed, 0, Stream::Resources, 1);
  seed_resources(map.energy, cfg.energy_budget(), res.scatter_quantum, energy_rng);

  world.reference = measure_totals(world, cfg);
  return world;
}

void check_invariants(const WorldState& world, const SimConfig& cfg) {
  const auto fail = [&](const std::string& what) {
    throw std::logic_error("step " + std::to_string(world.step) + ": " + what);
  };
  const auto totals = measure_totals(world, cfg);
  if (totals.biomass != world.reference.biomass) {
    fail("biomass total " + std::to_string(totals.biomass) + " != reference " +
         std::to_string(world.reference.biomass));
  }
  if (totals.water != world.reference.water) {
    fail("water total " + std::to_string(totals.water) + " != reference " +
         std::to_string(world.reference.water));
  }
  const auto& map = world.map;
  for (std::size_t c = 0; c < map.cell_count(); ++c) {
    if (map.water[c] < 0 || map.energy[c] < 0 || map.biomass[c] < 0 || map.rock[c] < 0) {
      fail("negative layer value at cell " + std::to_string(c));
    }
  }
  std::uint32_t live = 0;
  const auto cap = cfg.resources.stomach_capacity;
  for (std::uint32_t slot = 0; slot < world.agents.capacity(); ++slot) {
    const auto& agent = world.agents[slot];
    if (!agent.alive) continue;
    ++live;
    if (!map.in_bounds(agent.pos)) fail("agent " + std::to_string(slot) + " out of bounds");
    if (map.occupancy[map.index(agent.pos)] != static_cast<std::int32_t>(slot)) {
      fail("occupancy does not point at agent " + std::to_string(slot));
    }
    if (!(agent.hp > 0.0f) || agent.hp > cfg.health.max_hp) {
      fail("agent " + std::to_string(slot) + " has hp outside (0, max]");
    }
    for (std::int32_t store : {agent.store_water, agent.store_energy, agent.store_biomass}) {
      if (store < 0 || store > cap) fail("agent " + std::to_string(slot) + " store out of range");
    }
  }
  if (live != world.agents.live_count()) fail("live count disagrees with alive flags");
  const auto occupied = static_cast<std::uint32_t>(
      std::count_if(map.occupancy.begin(), map.occupancy.end(),
                    [](std::int32_t v) { return v != kEmptyCell; }));
  if (occupied != live) fail("occupied cells do not match live agents");
}

}  // namespace ecosim
