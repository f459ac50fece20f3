#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "ecosim/config.hpp"
#include "ecosim/dynamics.hpp"
#include "ecosim/metrics.hpp"
#include "ecosim/parallel.hpp"
#include "ecosim/policy.hpp"
#include "ecosim/terrain.hpp"
#include "ecosim/world.hpp"

namespace ecosim {

struct Digest {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  friend bool operator==(const Digest&, const Digest&) = default;
  [[nodiscard]] std::string hex() const;
};

/// Order-sensitive 128-bit hash accumulated over 64-bit words.
class Hasher128 {
 public:
  void add(std::uint64_t word);
  void add_bytes(const void* data, std::size_t size);
  [[nodiscard]] Digest finish() const;

 private:
  std::uint64_t a_ = 0x243F6A8885A308D3ull;
  std::uint64_t b_ = 0x13198A2E03707344ull;
  std::uint64_t count_ = 0;
};

/// Hash over step, RNG key, all layers, live agent records, live policies and
/// the conservation reference. Dead slots are excluded.
Digest state_digest(const WorldState& world, const PolicyPool& pool);

/// Reusable per-step buffers.
struct StepBuffers {
  StepScratch scratch;
  FlowScratch flow;
  std::vector<ActionIntent> intents;
};

/// Samples one intent per live agent from the start-of-step world, in
/// ascending slot order.
std::vector<ActionIntent> choose_actions(const WorldState& world, const PolicyPool& pool,
                                         const SimConfig& cfg, WorkerPool& workers);

/// Advances the world by one step: sense, act, attack, eat, move, reproduce,
/// metabolise, die, flow water, grow energy.
StepTrace step(WorldState& world, PolicyPool& pool, const SimConfig& cfg, WorkerPool& workers,
               StepBuffers& buffers);

/// Owns a world, its policy pool and the worker pool driving it.
class Engine {
 public:
  explicit Engine(const SimConfig& cfg, int workers = 1);
  Engine(const SimConfig& cfg, WorldState world, PolicyPool pool, int workers = 1);

  StepTrace step();

  [[nodiscard]] const SimConfig& config() const { return cfg_; }
  [[nodiscard]] const WorldState& world() const { return world_; }
  WorldState& world() { return world_; }
  [[nodiscard]] const PolicyPool& pool() const { return pool_; }
  PolicyPool& pool() { return pool_; }
  [[nodiscard]] Digest digest() const { return state_digest(world_, pool_); }
  [[nodiscard]] int workers() const { return workers_->workers(); }

 private:
  SimConfig cfg_;
  WorldState world_;
  PolicyPool pool_;
  std::unique_ptr<WorkerPool> workers_;
  StepBuffers buffers_;
};

enum class Termination { StepLimit, Extinction };
std::string_view to_string(Termination t);

struct EpisodeOptions {
  /// Emit a record for the engine's current step before stepping.
  bool record_initial = true;
  /// Run check_invariants after every step (slow; for tests and soaks).
  bool check_every_step = false;
  std::function<void(const MetricsRecord&)> on_record;
  std::uint64_t snapshot_every = 0;
  std::function<void(const Engine&)> on_snapshot;
  /// Heartbeat line every metrics.heartbeat_every steps when non-null.
  std::ostream* heartbeat = nullptr;
};

struct EpisodeResult {
  std::vector<MetricsRecord> records;
  Termination termination = Termination::StepLimit;
  StepTrace totals;
  std::uint64_t final_step = 0;
};

/// Steps until cfg.steps or extinction, sampling metrics every
/// cfg.metrics.every steps plus the final step.
EpisodeResult run_episode(Engine& engine, const EpisodeOptions& options = {});
EpisodeResult run_episode(const SimConfig& cfg, int workers = 1,
                          const EpisodeOptions& options = {});

}  // namespace ecosim
