#include "ecosim/policy.hpp"

#include <array>
#include <limits>
#include <stdexcept>
#include <string>

namespace ecosim {

namespace {

constexpr std::array<Action, 9> kWithAttack = {
    Action::Rest,      Action::TurnCW,    Action::TurnCCW,    Action::Forward,   Action::Attack,
    Action::EatWater,  Action::EatEnergy, Action::EatBiomass, Action::Reproduce};
constexpr std::array<Action, 8> kWithoutAttack = {
    Action::Rest,     Action::TurnCW,    Action::TurnCCW,    Action::Forward,
    Action::EatWater, Action::EatEnergy, Action::EatBiomass, Action::Reproduce};

inline float load(const bf16_bits* p) { return from_bf16(*p); }

template <int Outputs>
void accumulate_fixed(const bf16_bits* w, std::span<const float> x, float* out) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const float xi = x[i];
    const bf16_bits* row = w + i * Outputs;
    for (int o = 0; o < Outputs; ++o) out[o] += load(row + o) * xi;
  }
}

/// out[o] += sum_i x[i] * W[i][o], accumulated in ascending i.
void accumulate(const bf16_bits* w, std::span<const float> x, float* out, int outputs) {
  if (outputs == 64) return accumulate_fixed<64>(w, x, out);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const float xi = x[i];
    const bf16_bits* row = w + i * static_cast<std::size_t>(outputs);
    for (int o = 0; o < outputs; ++o) out[o] += load(row + o) * xi;
  }
}

void add_bias(const bf16_bits* b, float* out, int outputs) {
  for (int o = 0; o < outputs; ++o) out[o] += load(b + o);
}

void relu(float* v, int n) {
  for (int i = 0; i < n; ++i) v[i] = v[i] > 0.0f ? v[i] : 0.0f;
}

}  // namespace

std::span<const Action> action_table(bool attack_enabled) {
  if (attack_enabled) return kWithAttack;
  return kWithoutAttack;
}

PolicyArch PolicyArch::make(SensorSet sensors, bool attack_enabled, int width) {
  PolicyArch arch;
  arch.sensor_widths = {kInternalWidth, kExternalWidth};
  if (sensors != SensorSet::R) arch.sensor_widths.push_back(kCompassWidth);
  if (sensors == SensorSet::RCV) arch.sensor_widths.push_back(kVisionWidth);
  arch.width = width;
  arch.actions = action_count_for(attack_enabled);
  return arch;
}

int PolicyArch::input_width() const {
  int total = 0;
  for (int w : sensor_widths) total += w;
  return total;
}

std::size_t PolicyArch::weight_count() const {
  const auto h = static_cast<std::size_t>(width);
  const auto a = static_cast<std::size_t>(actions);
  std::size_t count = 0;
  for (int in : sensor_widths) count += static_cast<std::size_t>(in) * h + h;
  count += 2 * (h * h + h);
  count += h * a + a;
  return count;
}

std::size_t count_parameters(const PolicyArch& arch) { return arch.weight_count() + 1; }

PolicyPool::PolicyPool(PolicyArch arch, std::uint32_t capacity)
    : arch_(std::move(arch)),
      capacity_(capacity),
      stride_(arch_.weight_count()),
      weights_(stride_ * capacity, 0),
      log_temperature_(capacity, 0.0f) {}

PolicyParams PolicyPool::get(std::uint32_t slot) const {
  const auto w = weights(slot);
  return PolicyParams{{w.begin(), w.end()}, log_temperature(slot)};
}

void PolicyPool::set(std::uint32_t slot, const PolicyParams& params) {
  if (params.weights.size() != stride_) throw std::invalid_argument("policy shape mismatch");
  std::copy(params.weights.begin(), params.weights.end(), weights(slot).begin());
  log_temperature(slot) = params.log_temperature;
}

void init_policy(const PolicyArch& arch, std::span<bf16_bits> weights, float& log_temperature,
                 CounterRng& rng) {
  if (weights.size() != arch.weight_count()) {
    throw std::invalid_argument("policy weight span does not match architecture");
  }
  std::size_t at = 0;
  const auto fill_layer = [&](int fan_in, int fan_out) {
    const double std = std::sqrt(2.0 / fan_in);
    const std::size_t n = static_cast<std::size_t>(fan_in) * static_cast<std::size_t>(fan_out);
    for (std::size_t i = 0; i < n; ++i) weights[at++] = to_bf16(static_cast<float>(rng.normal() * std));
    for (int i = 0; i < fan_out; ++i) weights[at++] = to_bf16(0.0f);
  };
  for (int in : arch.sensor_widths) fill_layer(in, arch.width);
  fill_layer(arch.width, arch.width);
  fill_layer(arch.width, arch.width);
  fill_layer(arch.width, arch.actions);
  log_temperature = 0.0f;
}

PolicyParams init_policy(const PolicyArch& arch, CounterRng& rng) {
  PolicyParams params;
  params.weights.resize(arch.weight_count());
  init_policy(arch, params.weights, params.log_temperature, rng);
  return params;
}

void forward(const PolicyArch& arch, std::span<const bf16_bits> weights,
             std::span<const float> obs, std::span<float> logits, ForwardScratch& scratch) {
  if (weights.size() != arch.weight_count()) {
    throw std::invalid_argument("policy weights do not match architecture");
  }
  if (obs.size() != static_cast<std::size_t>(arch.input_width())) {
    throw std::invalid_argument("observation width " + std::to_string(obs.size()) +
                                " does not match policy input width " +
                                std::to_string(arch.input_width()));
  }
  if (logits.size() != static_cast<std::size_t>(arch.actions)) {
    throw std::invalid_argument("logit buffer does not match action count");
  }
  const int h = arch.width;
  scratch.a.assign(static_cast<std::size_t>(h), 0.0f);
  scratch.b.assign(static_cast<std::size_t>(h), 0.0f);
  float* hidden = scratch.a.data();
  float* other = scratch.b.data();
  const bf16_bits* w = weights.data();

  // Each encoder is evaluated on its own then summed, in sensor order.
  std::size_t offset = 0;
  for (int in : arch.sensor_widths) {
    std::fill(other, other + h, 0.0f);
    accumulate(w, obs.subspan(offset, static_cast<std::size_t>(in)), other, h);
    w += static_cast<std::size_t>(in) * h;
    add_bias(w, other, h);
    w += h;
    for (int o = 0; o < h; ++o) hidden[o] += other[o];
    offset += static_cast<std::size_t>(in);
  }
  for (int layer = 0; layer < 2; ++layer) {
    std::fill(other, other + h, 0.0f);
    accumulate(w, std::span<const float>(hidden, static_cast<std::size_t>(h)), other, h);
    w += static_cast<std::size_t>(h) * h;
    add_bias(w, other, h);
    w += h;
    relu(other, h);
    std::swap(hidden, other);
  }
  std::fill(logits.begin(), logits.end(), 0.0f);
  accumulate(w, std::span<const float>(hidden, static_cast<std::size_t>(h)), logits.data(),
             arch.actions);
  w += static_cast<std::size_t>(h) * arch.actions;
  add_bias(w, logits.data(), arch.actions);
}

std::vector<float> forward(const PolicyArch& arch, const PolicyParams& params,
                           std::span<const float> obs) {
  std::vector<float> logits(static_cast<std::size_t>(arch.actions));
  ForwardScratch scratch;
  forward(arch, params.weights, obs, logits, scratch);
  return logits;
}

int sample_action(std::span<const float> logits, float log_temperature, CounterRng& rng) {
  if (logits.empty() || logits.size() > static_cast<std::size_t>(kActionKinds)) {
    throw std::invalid_argument("sample_action: bad logit count");
  }
  const double inv_t = std::exp(-static_cast<double>(log_temperature));
  double peak = -std::numeric_limits<double>::infinity();
  for (float l : logits) peak = std::max(peak, static_cast<double>(l) * inv_t);
  std::array<double, kActionKinds> weight{};
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    weight[i] = std::exp(static_cast<double>(logits[i]) * inv_t - peak);
    total += weight[i];
  }
  const double target = rng.uniform() * total;
  double running = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    running += weight[i];
    if (target < running) return static_cast<int>(i);
  }
  return static_cast<int>(logits.size()) - 1;
}

}  // namespace ecosim
