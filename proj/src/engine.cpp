#include "ecosim/engine.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <ostream>

#include "ecosim/sensing.hpp"

namespace ecosim {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

template <class T>
void add_values(Hasher128& h, const std::vector<T>& values) {
  h.add(values.size());
  h.add_bytes(values.data(), values.size() * sizeof(T));
}

}  // namespace

std::string Digest::hex() const {
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  return buf;
}

void Hasher128::add(std::uint64_t word) {
  ++count_;
  const std::uint64_t m = mix64(word);
  a_ = std::rotl((a_ ^ m) * 0x9FB21C651E98DF25ull, 29);
  b_ = (b_ + mix64(word ^ (count_ * 0xD6E8FEB86659FD93ull))) * 0xC2B2AE3D27D4EB4Full;
  b_ ^= b_ >> 32;
}

void Hasher128::add_bytes(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::size_t i = 0;
  for (; i + 8 <= size; i += 8) {
    std::uint64_t w;
    std::memcpy(&w, bytes + i, 8);
    add(w);
  }
  if (i < size) {
    std::uint64_t w = 0;
    std::memcpy(&w, bytes + i, size - i);
    add(w ^ (static_cast<std::uint64_t>(size - i) << 56));
  }
}

Digest Hasher128::finish() const {
  return {mix64(a_ ^ mix64(count_)), mix64(b_ + a_)};
}

Digest state_digest(const WorldState& world, const PolicyPool& pool) {
  Hasher128 h;
  h.add(world.step);
  h.add(world.seed);
  h.add(static_cast<std::uint64_t>(world.map.size));
  add_values(h, world.map.rock);
  add_values(h, world.map.water);
  add_values(h, world.map.energy);
  add_values(h, world.map.biomass);
  add_values(h, world.map.occupancy);
  h.add(world.agents.capacity());
  h.add(world.agents.live_count());
  h.add(world.agents.next_uid);
  for (std::uint32_t slot = 0; slot < world.agents.capacity(); ++slot) {
    const auto& a = world.agents[slot];
    if (!a.alive) continue;
    h.add(slot);
    h.add((static_cast<std::uint64_t>(static_cast<std::uint32_t>(a.pos.x)) << 32) |
          static_cast<std::uint32_t>(a.pos.y));
    h.add(static_cast<std::uint64_t>(a.facing));
    h.add(std::bit_cast<std::uint32_t>(a.hp));
    h.add(a.age);
    h.add(static_cast<std::uint32_t>(a.store_water));
    h.add(static_cast<std::uint32_t>(a.store_energy));
    h.add(static_cast<std::uint32_t>(a.store_biomass));
    for (float c : a.color) h.add(std::bit_cast<std::uint32_t>(c));
    h.add(a.uid);
    h.add(a.parent);
    h.add(a.birth_step);
    const auto w = pool.weights(slot);
    h.add_bytes(w.data(), w.size() * sizeof(bf16_bits));
    h.add(std::bit_cast<std::uint32_t>(pool.log_temperature(slot)));
  }
  h.add(static_cast<std::uint64_t>(world.reference.biomass));
  h.add(static_cast<std::uint64_t>(world.reference.water));
  return h.finish();
}

std::vector<ActionIntent> choose_actions(const WorldState& world, const PolicyPool& pool,
                                         const SimConfig& cfg, WorkerPool& workers) {
  const std::vector<std::uint32_t> live = world.agents.live_slots();
  std::vector<ActionIntent> intents(live.size());
  const auto table = action_table(cfg.attack_enabled);
  const PolicyArch& arch = pool.arch();
  workers.parallel_for(live.size(), [&](std::size_t begin, std::size_t end) {
    std::vector<float> obs(static_cast<std::size_t>(arch.input_width()));
    std::vector<float> logits(static_cast<std::size_t>(arch.actions));
    ForwardScratch scratch;
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint32_t slot = live[i];
      write_observation(world, slot, cfg, obs);
      forward(arch, pool.weights(slot), obs, logits, scratch);
      CounterRng rng(world.seed, world.step, Stream::Action, slot);
      const int choice = sample_action(logits, pool.log_temperature(slot), rng);
      intents[i] = {slot, table[static_cast<std::size_t>(choice)]};
    }
  });
  return intents;
}

StepTrace step(WorldState& world, PolicyPool& pool, const SimConfig& cfg, WorkerPool& workers,
               StepBuffers& buffers) {
  StepTrace trace;
  buffers.intents = choose_actions(world, pool, cfg, workers);
  const auto& intents = buffers.intents;
  trace.live_at_start = static_cast<std::uint32_t>(intents.size());
  for (const auto& intent : intents) ++trace.actions[static_cast<int>(intent.action)];

  auto& scratch = buffers.scratch;
  scratch.reset(world.agents.capacity(), world.map.cell_count());
  if (cfg.attack_enabled) resolve_attacks(world, intents, scratch, trace);
  resolve_eats(world, intents, cfg, scratch);
  resolve_moves(world, intents, scratch, trace);
  resolve_reproduction(world, intents, pool, cfg, scratch, trace, &workers);
  apply_metabolism(world, intents, cfg, scratch, &workers);
  process_deaths(world, cfg, scratch, trace);
  flow_water_tick(world.map.size, world.map.rock, world.map.water, cfg.resources.flow_rate,
                  buffers.flow, &workers);
  grow_energy(world.map, cfg.resources, &workers);
  ++world.step;
  return trace;
}

Engine::Engine(const SimConfig& cfg, int workers)
    : cfg_(validate_config(cfg)),
      pool_(PolicyArch::make(cfg_.sensors, cfg_.attack_enabled, cfg_.policy.hidden_width),
            cfg_.max_population),
      workers_(std::make_unique<WorkerPool>(workers)) {
  world_ = init_world(cfg_, pool_);
}

Engine::Engine(const SimConfig& cfg, WorldState world, PolicyPool pool, int workers)
    : cfg_(validate_config(cfg)),
      world_(std::move(world)),
      pool_(std::move(pool)),
      workers_(std::make_unique<WorkerPool>(workers)) {}

StepTrace Engine::step() { return ecosim::step(world_, pool_, cfg_, *workers_, buffers_); }

std::string_view to_string(Termination t) {
  return t == Termination::Extinction ? "extinction" : "step_limit";
}

EpisodeResult run_episode(Engine& engine, const EpisodeOptions& options) {
  EpisodeResult result;
  const SimConfig& cfg = engine.config();
  TraceWindow window;
  const auto emit = [&]() {
    MetricsRecord rec = record_metrics(engine.world(), cfg, window);
    window.clear();
    if (options.on_record) options.on_record(rec);
    result.records.push_back(rec);
  };
  if (options.record_initial) emit();
  while (engine.world().step < cfg.steps && engine.world().agents.live_count() > 0) {
    const StepTrace trace = engine.step();
    window.add(trace);
    result.totals += trace;
    const std::uint64_t now = engine.world().step;
    if (options.check_every_step) check_invariants(engine.world(), cfg);
    const bool extinct = engine.world().agents.live_count() == 0;
    if (now % cfg.metrics.every == 0 || extinct || now == cfg.steps) emit();
    if (options.snapshot_every > 0 && now % options.snapshot_every == 0 && options.on_snapshot) {
      options.on_snapshot(engine);
    }
    if (options.heartbeat != nullptr && cfg.metrics.heartbeat_every > 0 &&
        now % cfg.metrics.heartbeat_every == 0) {
      *options.heartbeat << "step " << now << " population " << engine.world().agents.live_count()
                         << '\n';
    }
  }
  result.final_step = engine.world().step;
  result.termination = engine.world().agents.live_count() == 0 ? Termination::Extinction
                                                               : Termination::StepLimit;
  return result;
}

EpisodeResult run_episode(const SimConfig& cfg, int workers, const EpisodeOptions& options) {
  Engine engine(cfg, workers);
  return run_episode(engine, options);
}

}  // namespace ecosim
