#include "serial_reference.hpp"

#include <algorithm>
#include <stdexcept>

#include "ecosim/dynamics.hpp"
#include "ecosim/rng.hpp"
#include "ecosim/sensing.hpp"

namespace ecosim::testing {

namespace {

struct Intent {
  std::uint32_t slot;
  Action action;
};

bool covers(GridPos attacker, Orientation facing, GridPos target) {
  const GridPos f = facing_vector(facing);
  const GridPos r = right_vector(facing);
  for (int d = 1; d <= 3; ++d) {
    for (int s = -1; s <= 1; ++s) {
      if (attacker + d * f + s * r == target) return true;
    }
  }
  return false;
}

std::int32_t& store_for(AgentRecord& a, Action act) {
  if (act == Action::EatWater) return a.store_water;
  if (act == Action::EatEnergy) return a.store_energy;
  return a.store_biomass;
}

std::vector<std::int32_t>& layer_for(GridLayers& m, Action act) {
  if (act == Action::EatWater) return m.water;
  if (act == Action::EatEnergy) return m.energy;
  return m.biomass;
}

ActionCost cost_of(Action act, const ResourceConfig& r) {
  switch (act) {
    case Action::Rest: return r.rest;
    case Action::Attack: return r.attack;
    case Action::Reproduce: return r.reproduce;
    case Action::EatWater:
    case Action::EatEnergy:
    case Action::EatBiomass: return r.eat;
    default: return r.move;
  }
}

}  // namespace

void reference_flow(int size, const std::vector<std::int32_t>& rock,
                    std::vector<std::int32_t>& water, std::int32_t flow_rate) {
  const std::vector<std::int32_t> before = water;
  const int dx[4] = {0, 1, 0, -1};
  const int dy[4] = {-1, 0, 1, 0};
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const int c = y * size + x;
      if (before[c] <= 0) continue;
      const long long h = static_cast<long long>(rock[c]) + before[c];
      long long low = h;
      int target = -1;
      for (int d = 0; d < 4; ++d) {
        const int nx = x + dx[d];
        const int ny = y + dy[d];
        if (nx < 0 || ny < 0 || nx >= size || ny >= size) continue;
        const int n = ny * size + nx;
        const long long hn = static_cast<long long>(rock[n]) + before[n];
        if (hn < low) {
          low = hn;
          target = n;
        }
      }
      if (target < 0) continue;
      const long long amount = std::min({static_cast<long long>(before[c]),
                                         static_cast<long long>(flow_rate), (h - low) / 2});
      if (amount <= 0) continue;
      water[c] -= static_cast<std::int32_t>(amount);
      water[target] += static_cast<std::int32_t>(amount);
    }
  }
}

void reference_step(WorldState& world, PolicyPool& pool, const SimConfig& cfg) {
  auto& map = world.map;
  auto& agents = world.agents;
  const auto& res = cfg.resources;
  const auto& health = cfg.health;
  const std::uint32_t capacity = agents.capacity();
  const auto table = action_table(cfg.attack_enabled);

  // Sense and decide.
  std::vector<Intent> intents;
  for (std::uint32_t s = 0; s < capacity; ++s) {
    if (!agents[s].alive) continue;
    const std::vector<float> obs = build_observation(world, s, cfg).flatten();
    const std::vector<float> logits = forward(pool.arch(), pool.get(s), obs);
    CounterRng rng(world.seed, world.step, Stream::Action, s);
    intents.push_back({s, table[static_cast<std::size_t>(sample_action(logits, pool.log_temperature(s), rng))]});
  }

  // Attacks: each victim looks for the lowest attacker covering it.
  std::vector<int> killer(capacity, -1);
  if (cfg.attack_enabled) {
    for (std::uint32_t v = 0; v < capacity; ++v) {
      if (!agents[v].alive) continue;
      for (const auto& in : intents) {
        if (in.action != Action::Attack) continue;
        if (covers(agents[in.slot].pos, agents[in.slot].facing, agents[v].pos)) {
          killer[v] = static_cast<int>(in.slot);
          break;
        }
      }
    }
    for (std::uint32_t v = 0; v < capacity; ++v) {
      if (killer[v] >= 0) agents[v].hp = 0.0f;
    }
  }

  for (const auto& in : intents) {
    if (killer[in.slot] >= 0) continue;
    if (in.action != Action::EatWater && in.action != Action::EatEnergy &&
        in.action != Action::EatBiomass) {
      continue;
    }
    auto& a = agents[in.slot];
    auto& cell = layer_for(map, in.action)[map.index(a.pos)];
    auto& store = store_for(a, in.action);
    std::int32_t amount = std::min(res.eat_amount, cell);
    amount = std::min(amount, res.stomach_capacity - store);
    amount = std::max(amount, 0);
    cell -= amount;
    store += amount;
  }

  // Moves.
  const std::vector<std::int32_t> occupied = map.occupancy;
  std::vector<GridPos> targets(intents.size());
  std::vector<bool> wants(intents.size(), false);
  for (std::size_t i = 0; i < intents.size(); ++i) {
    const auto& in = intents[i];
    if (killer[in.slot] >= 0) continue;
    auto& a = agents[in.slot];
    if (in.action == Action::TurnCW) a.facing = turn_cw(a.facing);
    if (in.action == Action::TurnCCW) a.facing = turn_ccw(a.facing);
    if (in.action == Action::Forward) {
      targets[i] = a.pos + facing_vector(a.facing);
      wants[i] = map.in_bounds(targets[i]) && occupied[map.index(targets[i])] == kEmptyCell;
    }
  }
  for (std::size_t i = 0; i < intents.size(); ++i) {
    if (!wants[i]) continue;
    bool contested = false;
    for (std::size_t j = 0; j < intents.size(); ++j) {
      if (j != i && wants[j] && targets[j] == targets[i]) contested = true;
    }
    if (contested) continue;
    auto& a = agents[intents[i].slot];
    map.occupancy[map.index(a.pos)] = kEmptyCell;
    a.pos = targets[i];
    map.occupancy[map.index(a.pos)] = static_cast<std::int32_t>(intents[i].slot);
  }

  // Reproduction.
  const MutationSettings settings = MutationSettings::from(cfg.policy);
  for (const auto& in : intents) {
    if (in.action != Action::Reproduce || killer[in.slot] >= 0) continue;
    auto& p = agents[in.slot];
    if (p.store_biomass < res.base_biomass) continue;
    if (p.store_energy < res.child_energy + res.reproduce.energy) continue;
    if (p.store_water < res.child_water + res.reproduce.water) continue;
    const GridPos behind = p.pos - facing_vector(p.facing);
    if (!map.in_bounds(behind) || map.occupancy[map.index(behind)] != kEmptyCell) continue;
    std::uint32_t child = capacity;
    for (std::uint32_t s = 0; s < capacity; ++s) {
      if (!agents[s].alive) {
        child = s;
        break;
      }
    }
    if (child == capacity) continue;
    if (agents.allocate() != child) throw std::logic_error("free list disagrees with slot scan");
    auto& c = agents[child];
    auto& parent = agents[in.slot];
    parent.store_biomass -= res.base_biomass;
    parent.store_energy -= res.child_energy;
    parent.store_water -= res.child_water;
    c.pos = behind;
    c.facing = parent.facing;
    c.hp = health.max_hp;
    c.store_energy = res.child_energy;
    c.store_water = res.child_water;
    c.uid = agents.next_uid++;
    c.parent = parent.uid;
    c.birth_step = world.step;
    map.occupancy[map.index(behind)] = static_cast<std::int32_t>(child);
    CounterRng noise(world.seed, world.step, Stream::Mutation, child);
    PolicyParams mutated = mutate(pool.get(in.slot), settings, noise);
    pool.set(child, mutated);
    c.color = mutate_color(parent.color, settings.std, noise);
  }

  // Metabolism.
  std::vector<bool> starved(capacity, false);
  const double floor = static_cast<double>(health.heal_threshold) * res.stomach_capacity;
  for (const auto& in : intents) {
    if (killer[in.slot] >= 0) continue;
    auto& a = agents[in.slot];
    auto& cell_water = map.water[map.index(a.pos)];
    const ActionCost cost = cost_of(in.action, res);
    if (a.store_energy < cost.energy) {
      a.store_energy = 0;
      starved[in.slot] = true;
    } else {
      a.store_energy -= cost.energy;
    }
    if (a.store_water < cost.water) {
      cell_water += a.store_water;
      a.store_water = 0;
      starved[in.slot] = true;
    } else {
      a.store_water -= cost.water;
      cell_water += cost.water;
    }
    if (starved[in.slot]) a.hp -= health.starvation_damage;
    if (a.age > health.age_onset) {
      a.hp -= static_cast<float>(a.age - health.age_onset) * health.age_slope;
    }
    if (a.hp > 0.0f && a.hp < health.max_hp && a.store_energy > floor && a.store_water > floor) {
      const std::int32_t e = std::min(a.store_energy, health.heal_energy);
      const std::int32_t w = std::min(a.store_water, health.heal_water);
      a.store_energy -= e;
      a.store_water -= w;
      cell_water += w;
      a.hp = std::min(health.max_hp, a.hp + health.recovery_rate);
    }
    a.age += 1;
  }

  // Deaths.
  for (std::uint32_t s = 0; s < capacity; ++s) {
    auto& a = agents[s];
    if (!a.alive || a.hp > 0.0f) continue;
    const std::size_t cell = map.index(a.pos);
    map.biomass[cell] += a.store_biomass + res.base_biomass;
    map.energy[cell] += a.store_energy;
    map.water[cell] += a.store_water;
    map.occupancy[cell] = kEmptyCell;
    a.store_biomass = a.store_energy = a.store_water = 0;
    agents.release(s);
  }

  reference_flow(map.size, map.rock, map.water, res.flow_rate);
  for (std::size_t c = 0; c < map.cell_count(); ++c) {
    // Growth never lowers a cell that already sits above the cap.
    if (map.biomass[c] > 0 && map.energy[c] < res.energy_cap) {
      map.energy[c] = std::min(res.energy_cap, map.energy[c] + res.energy_growth_rate);
    }
  }
  world.step += 1;
}

FuzzWorld make_fuzz_world(std::uint64_t seed, int size, std::uint32_t max_agents) {
  CounterRng rng(seed, 0, Stream::Fuzz, 0);
  FuzzWorld f;
  auto& cfg = f.cfg;
  cfg.grid_size = size;
  cfg.seed = seed;
  cfg.terrain = static_cast<TerrainKind>(rng.below(6));
  cfg.sensors = static_cast<SensorSet>(rng.below(3));
  cfg.attack_enabled = rng.below(2) == 1;
  cfg.initial_population = 1 + static_cast<std::uint32_t>(rng.below(max_agents));
  cfg.max_population = max_agents;
  // Short lives and cheap reproduction so births, starvation and age deaths all occur.
  cfg.health.age_onset = 1 + static_cast<std::uint32_t>(rng.below(200));
  cfg.health.age_slope = 0.05f;
  cfg.resources.base_biomass = 32;
  cfg.resources.child_energy = 16;
  cfg.resources.child_water = 16;
  cfg.policy.mutation_std = 0.2f;
  cfg.metrics.every = 10;
  cfg = validate_config(cfg);

  f.pool = PolicyPool(PolicyArch::make(cfg.sensors, cfg.attack_enabled, cfg.policy.hidden_width),
                      cfg.max_population);
  f.world = init_world(cfg, f.pool);
  auto& map = f.world.map;
  for (std::size_t c = 0; c < map.cell_count(); ++c) {
    map.biomass[c] += static_cast<std::int32_t>(rng.below(200));
    map.energy[c] += static_cast<std::int32_t>(rng.below(200));
    if (rng.below(4) == 0) map.water[c] += static_cast<std::int32_t>(rng.below(300));
  }
  const auto cap = static_cast<std::uint64_t>(cfg.resources.stomach_capacity) + 1;
  for (const auto slot : f.world.agents.live_slots()) {
    auto& a = f.world.agents[slot];
    a.store_water = static_cast<std::int32_t>(rng.below(cap));
    a.store_energy = static_cast<std::int32_t>(rng.below(cap));
    a.store_biomass = static_cast<std::int32_t>(rng.below(cap));
    a.hp = static_cast<float>(1 + rng.below(100));
    a.age = static_cast<std::uint32_t>(rng.below(400));
    // Flatten or sharpen the policy so both random and repetitive behaviour show up.
    f.pool.log_temperature(slot) = static_cast<float>(rng.uniform() * 4.0 - 2.0);
  }
  f.world.reference = measure_totals(f.world, cfg);
  return f;
}

}  // namespace ecosim::testing
