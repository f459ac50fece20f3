#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <vector>

#include "ecosim/bfloat16.hpp"
#include "ecosim/config.hpp"
#include "ecosim/rng.hpp"

namespace ecosim {

enum class Action : std::uint8_t {
  Rest,
  TurnCW,
  TurnCCW,
  Forward,
  Attack,
  EatWater,
  EatEnergy,
  EatBiomass,
  Reproduce,
};
inline constexpr int kActionKinds = 9;

/// Head index -> action. Attack is absent when attacking is disabled.
std::span<const Action> action_table(bool attack_enabled);

/// Observation widths fed to the per-sensor encoders.
inline constexpr int kInternalWidth = 5;
inline constexpr int kExternalWidth = 3;
inline constexpr int kCompassWidth = 4;
inline constexpr int kVisionSide = 7;
inline constexpr int kVisionChannels = 4;
inline constexpr int kVisionWidth = kVisionSide * kVisionSide * kVisionChannels;

/// Network shape. Weight matrices are stored input-major ([in][out]) so the
/// inner loop of forward runs over contiguous outputs.
///
/// Flat layout, per enabled sensor s: W_s[in_s][width], b_s[width]; then
/// trunk W1[width][width], b1, W2[width][width], b2; then head
/// Wh[width][actions], bh[actions]. The evolvable log-temperature is kept
/// beside the weights and counted as one extra parameter.
struct PolicyArch {
  std::vector<int> sensor_widths;
  int width = 64;
  int actions = 9;

  static PolicyArch make(SensorSet sensors, bool attack_enabled, int width = 64);

  [[nodiscard]] int input_width() const;
  /// Number of stored brain-float scalars (everything but the temperature).
  [[nodiscard]] std::size_t weight_count() const;
  friend bool operator==(const PolicyArch&, const PolicyArch&) = default;
};

/// Exact trainable parameter count, including biases and the temperature.
std::size_t count_parameters(const PolicyArch& arch);

/// One agent's parameters as a standalone value.
struct PolicyParams {
  std::vector<bf16_bits> weights;
  float log_temperature = 0.0f;
};

/// Structure-of-arrays parameter storage indexed by agent slot.
class PolicyPool {
 public:
  PolicyPool() = default;
  PolicyPool(PolicyArch arch, std::uint32_t capacity);

  [[nodiscard]] const PolicyArch& arch() const { return arch_; }
  [[nodiscard]] std::uint32_t capacity() const { return capacity_; }
  [[nodiscard]] std::size_t stride() const { return stride_; }

  std::span<bf16_bits> weights(std::uint32_t slot) {
    return {weights_.data() + slot * stride_, stride_};
  }
  [[nodiscard]] std::span<const bf16_bits> weights(std::uint32_t slot) const {
    return {weights_.data() + slot * stride_, stride_};
  }
  float& log_temperature(std::uint32_t slot) { return log_temperature_[slot]; }
  [[nodiscard]] float log_temperature(std::uint32_t slot) const { return log_temperature_[slot]; }

  [[nodiscard]] PolicyParams get(std::uint32_t slot) const;
  void set(std::uint32_t slot, const PolicyParams& params);

 private:
  PolicyArch arch_;
  std::uint32_t capacity_ = 0;
  std::size_t stride_ = 0;
  std::vector<bf16_bits> weights_;
  std::vector<float> log_temperature_;
};

/// Kaiming-normal weights (std sqrt(2 / fan_in)) quantised to brain-float,
/// zero biases, log-temperature 0.
void init_policy(const PolicyArch& arch, std::span<bf16_bits> weights, float& log_temperature,
                 CounterRng& rng);
PolicyParams init_policy(const PolicyArch& arch, CounterRng& rng);

/// Scratch activations for forward; reusable across calls.
struct ForwardScratch {
  std::vector<float> a;
  std::vector<float> b;
};

/// logits = head(ReLU(W2 ReLU(W1 sum_s Enc_s(obs_s) + b1) + b2)).
/// obs is the concatenation of the enabled sensors in arch order.
/// Throws std::invalid_argument on shape mismatch.
void forward(const PolicyArch& arch, std::span<const bf16_bits> weights,
             std::span<const float> obs, std::span<float> logits, ForwardScratch& scratch);
std::vector<float> forward(const PolicyArch& arch, const PolicyParams& params,
                           std::span<const float> obs);

/// Samples from softmax(logits / T), T = exp(log_temperature).
int sample_action(std::span<const float> logits, float log_temperature, CounterRng& rng);

template <class T>
concept NormalSource = requires(T& source) {
  { source.normal() } -> std::convertible_to<double>;
};

struct MutationSettings {
  float std = 3e-2f;
  float min_log_temperature = std::log(0.05f);
  float max_log_temperature = std::log(5.0f);

  static MutationSettings from(const PolicyConfig& cfg) {
    return {cfg.mutation_std, std::log(cfg.min_temperature), std::log(cfg.max_temperature)};
  }
};

/// child = quantize(parent + N(0, std)) on every weight and bias, and the
/// log-temperature perturbed then clamped to its range. The parent is only read.
template <NormalSource Noise>
void mutate(std::span<const bf16_bits> parent, float parent_log_temperature,
            std::span<bf16_bits> child, float& child_log_temperature,
            const MutationSettings& settings, Noise& noise) {
  for (std::size_t i = 0; i < parent.size(); ++i) {
    const float delta = static_cast<float>(noise.normal()) * settings.std;
    float value = from_bf16(parent[i]) + delta;
    if (!std::isfinite(value)) value = from_bf16(parent[i]);
    child[i] = to_bf16(value);
  }
  const float delta = static_cast<float>(noise.normal()) * settings.std;
  child_log_temperature = std::clamp(parent_log_temperature + delta,
                                     settings.min_log_temperature, settings.max_log_temperature);
}

template <NormalSource Noise>
PolicyParams mutate(const PolicyParams& parent, const MutationSettings& settings, Noise& noise) {
  PolicyParams child;
  child.weights.resize(parent.weights.size());
  mutate(std::span<const bf16_bits>(parent.weights), parent.log_temperature,
         std::span<bf16_bits>(child.weights), child.log_temperature, settings, noise);
  return child;
}

/// Colour trait mutation: same noise scale, clamped to [0, 1] per channel.
template <NormalSource Noise>
std::array<float, 3> mutate_color(const std::array<float, 3>& parent, float std, Noise& noise) {
  std::array<float, 3> child{};
  for (int c = 0; c < 3; ++c) {
    child[c] = std::clamp(parent[c] + static_cast<float>(noise.normal()) * std, 0.0f, 1.0f);
  }
  return child;
}

}  // namespace ecosim
