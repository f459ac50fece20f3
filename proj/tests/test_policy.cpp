#include <cmath>
#include <numeric>

#include "doctest.h"
#include "ecosim/policy.hpp"

using namespace ecosim;

namespace {

struct ZeroNoise {
  double normal() { return 0.0; }
};

struct ConstantNoise {
  double value;
  double normal() { return value; }
};

/// Records every draw so deltas can be measured before quantization.
struct RecordingNoise {
  CounterRng rng;
  std::vector<double>* draws;
  double normal() {
    const double v = rng.normal();
    draws->push_back(v);
    return v;
  }
};

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.std += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(m.std / static_cast<double>(v.size() - 1));
  return m;
}

/// Column-at-a-time forward over the documented flat layout, in double.
std::vector<double> straight_forward(const PolicyArch& arch, const std::vector<bf16_bits>& w,
                                     const std::vector<float>& obs) {
  const int h = arch.width;
  std::size_t off = 0;
  std::size_t in_off = 0;
  const auto weight = [&](std::size_t base, int i, int o, int out) {
    return static_cast<double>(from_bf16(w[base + static_cast<std::size_t>(i) * out + o]));
  };
  std::vector<double> sum(h, 0.0);
  for (int in : arch.sensor_widths) {
    const std::size_t bias = off + static_cast<std::size_t>(in) * h;
    for (int o = 0; o < h; ++o) {
      double acc = from_bf16(w[bias + o]);
      for (int i = 0; i < in; ++i) acc += weight(off, i, o, h) * obs[in_off + i];
      sum[o] += acc;
    }
    off = bias + h;
    in_off += in;
  }
  const auto dense = [&](const std::vector<double>& x, int in, int out, bool relu) {
    const std::size_t bias = off + static_cast<std::size_t>(in) * out;
    std::vector<double> y(out);
    for (int o = 0; o < out; ++o) {
      double acc = from_bf16(w[bias + o]);
      for (int i = 0; i < in; ++i) acc += weight(off, i, o, out) * x[i];
      y[o] = relu ? std::max(0.0, acc) : acc;
    }
    off = bias + out;
    return y;
  };
  auto x = dense(sum, h, h, true);
  x = dense(x, h, h, true);
  return dense(x, h, arch.actions, false);
}

double chi_square(const std::vector<int>& counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  const double expected = total / static_cast<double>(counts.size());
  double chi = 0.0;
  for (int c : counts) chi += (c - expected) * (c - expected) / expected;
  return chi;
}

// Upper 1% points of the chi-square distribution.
constexpr double kChi2Crit7 = 18.475;
constexpr double kChi2Crit8 = 20.090;

}  // namespace

TEST_CASE("parameter counts") {
  const auto rcv = PolicyArch::make(SensorSet::RCV, true);
  const auto rc = PolicyArch::make(SensorSet::RC, true);
  const auto r = PolicyArch::make(SensorSet::R, false);
  // Independent arithmetic: encoders, two trunk layers, head, temperature.
  CHECK(count_parameters(rcv) == (5 + 3 + 4 + 196) * 64 + 4 * 64 + 2 * (64 * 64 + 64) + 64 * 9 + 9 + 1);
  CHECK(count_parameters(rcv) == 22474);
  CHECK(count_parameters(rc) == (5 + 3 + 4) * 64 + 3 * 64 + 2 * (64 * 64 + 64) + 64 * 9 + 9 + 1);
  CHECK(count_parameters(rc) == 9866);
  CHECK(count_parameters(r) == 9481);
  // Dropping the compass removes its encoder; dropping attack removes one head row.
  const auto rc8 = PolicyArch::make(SensorSet::RC, false);
  CHECK(count_parameters(rc8) - count_parameters(r) == 4 * 64 + 64);
  CHECK(count_parameters(rc) - count_parameters(rc8) == 64 + 1);
  CHECK(rcv.weight_count() + 1 == count_parameters(rcv));
  CHECK(rcv.input_width() == 208);
  CHECK(r.actions == 8);
  CHECK(action_table(false).size() == 8);
  CHECK(action_table(true)[4] == Action::Attack);
}

TEST_CASE("Kaiming initialization per layer") {
  const auto arch = PolicyArch::make(SensorSet::RCV, true);
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // (offset, count) of each weight matrix
  std::vector<int> fan_in;
  std::vector<std::size_t> biases;
  std::size_t off = 0;
  for (int in : arch.sensor_widths) {
    spans.emplace_back(off, static_cast<std::size_t>(in) * 64);
    fan_in.push_back(in);
    off += static_cast<std::size_t>(in) * 64;
    biases.push_back(off);
    off += 64;
  }
  for (int layer = 0; layer < 2; ++layer) {
    spans.emplace_back(off, 64 * 64);
    fan_in.push_back(64);
    off += 64 * 64;
    biases.push_back(off);
    off += 64;
  }
  spans.emplace_back(off, 64 * 9);
  fan_in.push_back(64);
  off += 64 * 9;
  biases.push_back(off);
  off += 9;
  REQUIRE(off == arch.weight_count());

  std::vector<std::vector<double>> samples(spans.size());
  for (std::uint32_t agent = 0; std::any_of(samples.begin(), samples.end(),
                                            [](const auto& s) { return s.size() < 100000; });
       ++agent) {
    CounterRng rng(2024, 0, Stream::PolicyInit, agent);
    const PolicyParams p = init_policy(arch, rng);
    CHECK(p.log_temperature == 0.0f);
    for (std::size_t l = 0; l < spans.size(); ++l) {
      CHECK(from_bf16(p.weights[biases[l]]) == 0.0f);
      if (samples[l].size() >= 100000) continue;
      for (std::size_t i = 0; i < spans[l].second; ++i) {
        samples[l].push_back(from_bf16(p.weights[spans[l].first + i]));
      }
    }
  }
  for (std::size_t l = 0; l < spans.size(); ++l) {
    const double expected = std::sqrt(2.0 / fan_in[l]);
    const auto m = moments(samples[l]);
    INFO("layer " << l << " std " << m.std << " expected " << expected);
    CHECK(std::abs(m.std - expected) <= 0.05 * expected);
    CHECK(std::abs(m.mean) <= 0.05 * expected);
  }
}

TEST_CASE("init is deterministic and biases are zero") {
  const auto arch = PolicyArch::make(SensorSet::RC, false);
  CounterRng a(1, 0, Stream::PolicyInit, 3);
  CounterRng b(1, 0, Stream::PolicyInit, 3);
  const auto pa = init_policy(arch, a);
  const auto pb = init_policy(arch, b);
  CHECK(pa.weights == pb.weights);
  for (auto v : pa.weights) CHECK(quantize_bf16(from_bf16(v)) == from_bf16(v));
}

TEST_CASE("forward edge cases") {
  const auto arch = PolicyArch::make(SensorSet::RC, true);
  PolicyParams zero{std::vector<bf16_bits>(arch.weight_count(), to_bf16(0.0f)), 0.0f};
  std::vector<float> obs(arch.input_width(), 0.7f);
  for (float v : forward(arch, zero, obs)) CHECK(v == 0.0f);

  CounterRng rng(8, 0, Stream::PolicyInit, 0);
  const auto params = init_policy(arch, rng);
  std::vector<float> zeros(arch.input_width(), 0.0f);
  for (float v : forward(arch, params, zeros)) CHECK(v == 0.0f);

  std::vector<float> wrong(arch.input_width() + 1, 0.0f);
  CHECK_THROWS_AS(forward(arch, params, wrong), std::invalid_argument);
}

TEST_CASE("forward matches a straight-line reference") {
  for (auto sensors : {SensorSet::R, SensorSet::RC, SensorSet::RCV}) {
    const auto arch = PolicyArch::make(sensors, sensors != SensorSet::R);
    for (std::uint32_t trial = 0; trial < 20; ++trial) {
      CounterRng rng(77, trial, Stream::Fuzz, static_cast<std::uint32_t>(sensors));
      PolicyParams p = init_policy(arch, rng);
      for (auto& w : p.weights) w = to_bf16(from_bf16(w) + static_cast<float>(rng.normal() * 0.05));
      std::vector<float> obs(arch.input_width());
      for (auto& v : obs) v = static_cast<float>(rng.uniform() * 2.0 - 1.0);
      const auto got = forward(arch, p, obs);
      const auto want = straight_forward(arch, p.weights, obs);
      REQUIRE(got.size() == want.size());
      double scale = 1.0;
      for (double v : want) scale = std::max(scale, std::abs(v));
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-4 * scale);
      CHECK(forward(arch, p, obs) == got);
    }
  }
}

TEST_CASE("uniform logits sample uniformly") {
  for (int actions : {8, 9}) {
    std::vector<float> logits(static_cast<std::size_t>(actions), 0.3f);
    std::vector<int> counts(static_cast<std::size_t>(actions), 0);
    std::vector<int> shifted(static_cast<std::size_t>(actions), 0);
    std::vector<int> hot(static_cast<std::size_t>(actions), 0);
    std::vector<float> plus(logits);
    for (auto& v : plus) v += 100.0f;
    for (std::uint32_t i = 0; i < 90000; ++i) {
      CounterRng r1(5, i, Stream::Action, 1);
      ++counts[static_cast<std::size_t>(sample_action(logits, 0.0f, r1))];
      CounterRng r2(6, i, Stream::Action, 1);
      ++shifted[static_cast<std::size_t>(sample_action(plus, 0.0f, r2))];
      CounterRng r3(7, i, Stream::Action, 1);
      ++hot[static_cast<std::size_t>(sample_action(logits, std::log(2.0f), r3))];
    }
    const double crit = actions == 8 ? kChi2Crit7 : kChi2Crit8;
    CHECK(chi_square(counts) < crit);
    CHECK(chi_square(shifted) < crit);
    CHECK(chi_square(hot) < crit);
  }
}

TEST_CASE("shifting logits keeps the sampling distribution") {
  const std::vector<float> logits = {1.0f, 0.5f, -0.2f, 0.0f, 2.0f, -1.0f, 0.3f, 0.1f};
  std::vector<float> plus(logits);
  for (auto& v : plus) v += 37.0f;
  std::vector<int> a(8, 0);
  std::vector<int> b(8, 0);
  for (std::uint32_t i = 0; i < 10000; ++i) {
    CounterRng r1(1, i, Stream::Action, 0);
    ++a[static_cast<std::size_t>(sample_action(logits, 0.0f, r1))];
    CounterRng r2(2, i, Stream::Action, 0);
    ++b[static_cast<std::size_t>(sample_action(plus, 0.0f, r2))];
  }
  // Two-sample chi-square homogeneity test, 7 degrees of freedom.
  double chi = 0.0;
  for (std::size_t k = 0; k < 8; ++k) {
    const double e = (a[k] + b[k]) / 2.0;
    if (e > 0) chi += (a[k] - e) * (a[k] - e) / e + (b[k] - e) * (b[k] - e) / e;
  }
  CHECK(chi < kChi2Crit7);
}

TEST_CASE("low temperature picks the argmax") {
  std::vector<float> logits(9, 0.0f);
  logits[0] = 10.0f;
  int hits = 0;
  for (std::uint32_t i = 0; i < 10000; ++i) {
    CounterRng rng(3, i, Stream::Action, 0);
    hits += sample_action(logits, std::log(0.05f), rng) == 0;
  }
  CHECK(hits / 10000.0 > 0.999);
}

TEST_CASE("mutation noise has the configured spread") {
  const auto arch = PolicyArch::make(SensorSet::RC, true);
  CounterRng init(4, 0, Stream::PolicyInit, 0);
  const auto parent = init_policy(arch, init);
  const MutationSettings settings;
  std::vector<double> draws;
  std::vector<double> deltas;
  for (std::uint32_t child = 0; draws.size() < 1000000; ++child) {
    RecordingNoise noise{CounterRng(4, 1, Stream::Mutation, child), &draws};
    const auto before = draws.size();
    const auto kid = mutate(parent, settings, noise);
    CHECK(kid.weights.size() == parent.weights.size());
    for (std::size_t i = 0; i < kid.weights.size(); ++i) REQUIRE(std::isfinite(from_bf16(kid.weights[i])));
    for (std::size_t i = before; i < draws.size(); ++i) {
      deltas.push_back(static_cast<double>(static_cast<float>(draws[i]) * settings.std));
    }
  }
  const auto m = moments(deltas);
  CHECK(std::abs(m.std - 3e-2) <= 0.05 * 3e-2);
  CHECK(std::abs(m.mean) < 1e-3);

  // Quantized deltas around zero weights keep the spread as well.
  PolicyParams zero{std::vector<bf16_bits>(arch.weight_count(), to_bf16(0.0f)), 0.0f};
  std::vector<double> stored;
  for (std::uint32_t child = 0; stored.size() < 200000; ++child) {
    CounterRng noise(9, 0, Stream::Mutation, child);
    const auto kid = mutate(zero, settings, noise);
    for (auto w : kid.weights) stored.push_back(from_bf16(w));
  }
  CHECK(std::abs(moments(stored).std - 3e-2) <= 0.05 * 3e-2);
}

TEST_CASE("zero noise copies the parent exactly") {
  const auto arch = PolicyArch::make(SensorSet::RCV, true);
  CounterRng init(4, 0, Stream::PolicyInit, 0);
  auto parent = init_policy(arch, init);
  parent.log_temperature = 0.25f;
  const auto copy = parent;
  ZeroNoise zero;
  const auto child = mutate(parent, MutationSettings{}, zero);
  CHECK(child.weights == parent.weights);
  CHECK(child.log_temperature == parent.log_temperature);
  CHECK(parent.weights == copy.weights);
  const std::array<float, 3> color = {0.1f, 0.5f, 0.9f};
  CHECK(mutate_color(color, 0.03f, zero) == color);
}

TEST_CASE("temperature and colour clamp at their bounds") {
  const auto arch = PolicyArch::make(SensorSet::R, false);
  const MutationSettings settings;
  PolicyParams parent{std::vector<bf16_bits>(arch.weight_count(), 0), settings.max_log_temperature};
  ConstantNoise up{3.0};
  CHECK(mutate(parent, settings, up).log_temperature == settings.max_log_temperature);
  parent.log_temperature = settings.min_log_temperature;
  ConstantNoise down{-3.0};
  CHECK(mutate(parent, settings, down).log_temperature == settings.min_log_temperature);
  const auto bright = mutate_color({1.0f, 0.0f, 0.5f}, 0.03f, up);
  CHECK(bright[0] == 1.0f);
  CHECK(bright[1] == doctest::Approx(0.09));
  CHECK(bright[2] == doctest::Approx(0.59));
  CHECK(mutate_color({1.0f, 0.0f, 0.5f}, 0.03f, down)[1] == 0.0f);
}

TEST_CASE("policy pool round trip") {
  const auto arch = PolicyArch::make(SensorSet::RC, false);
  PolicyPool pool(arch, 3);
  CounterRng rng(1, 0, Stream::PolicyInit, 0);
  const auto p = init_policy(arch, rng);
  pool.set(2, p);
  CHECK(pool.get(2).weights == p.weights);
  CHECK(pool.stride() == arch.weight_count());
  CHECK_THROWS(pool.set(1, PolicyParams{{1, 2, 3}, 0.0f}));
}
