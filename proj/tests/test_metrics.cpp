#include <cmath>

#include "doctest.h"
#include "ecosim/metrics.hpp"

using namespace ecosim;

namespace {

struct Series {
  std::vector<std::uint64_t> steps;
  std::vector<double> values;
};

/// Samples every 100 steps: plateau at `base` until `rise`, plateau at `peak`
/// through [rise, fall], then linear decay to `floor` over 10k steps and a
/// long tail at `floor`.
Series plateau_series(double base, double peak, double floor, std::uint64_t rise,
                      std::uint64_t fall, std::uint64_t end) {
  Series s;
  for (std::uint64_t t = 0; t <= end; t += 100) {
    double v = base;
    if (t >= rise && t <= fall) {
      v = peak;
    } else if (t > fall) {
      const double k = std::min(1.0, static_cast<double>(t - fall) / 10000.0);
      v = peak + (floor - peak) * k;
    } else if (t + 20000 > rise) {
      v = base + (peak - base) * (1.0 - static_cast<double>(rise - t) / 20000.0);
    }
    s.steps.push_back(t);
    s.values.push_back(v);
  }
  return s;
}

Series scaled(Series s, double c) {
  for (auto& v : s.values) v *= c;
  return s;
}

}  // namespace

TEST_CASE("rise to 100 then fall to 80 is one 20 percent event at 50k") {
  const auto s = plateau_series(60, 100, 80, 45000, 55000, 200000);
  const auto events = detect_mining_events(s.steps, s.values, DetectorSettings{});
  REQUIRE(events.size() == 1);
  CHECK(events[0].onset_step == 50000);
  CHECK(events[0].percent_drop == doctest::Approx(20.0).epsilon(0.005));
  CHECK(events[0].peak_step == 50000);
}

TEST_CASE("monotone series has no events") {
  Series s;
  for (std::uint64_t t = 0; t <= 100000; t += 100) {
    s.steps.push_back(t);
    s.values.push_back(1.0 + static_cast<double>(t));
  }
  CHECK(detect_mining_events(s.steps, s.values, DetectorSettings{}).empty());
}

TEST_CASE("threshold boundary at 9.9 and 10.1 percent") {
  const auto below = plateau_series(50, 100, 90.1, 45000, 55000, 200000);
  const auto above = plateau_series(50, 100, 89.9, 45000, 55000, 200000);
  CHECK(detect_mining_events(below.steps, below.values, DetectorSettings{}).empty());
  const auto hit = detect_mining_events(above.steps, above.values, DetectorSettings{});
  REQUIRE(hit.size() == 1);
  CHECK(hit[0].percent_drop == doctest::Approx(10.1).epsilon(0.001));
  // A dip to 95 that recovers is not mining either.
  const auto dip = plateau_series(50, 100, 95, 45000, 55000, 200000);
  CHECK(detect_mining_events(dip.steps, dip.values, DetectorSettings{}).empty());
}

TEST_CASE("detector is scale invariant") {
  const auto base = plateau_series(60, 100, 80, 45000, 55000, 200000);
  const auto want = detect_mining_events(base.steps, base.values, DetectorSettings{});
  for (double c : {0.01, 1.0, 1000.0}) {
    const auto s = scaled(base, c);
    const auto got = detect_mining_events(s.steps, s.values, DetectorSettings{});
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].onset_step == want[i].onset_step);
      CHECK(got[i].percent_drop == doctest::Approx(want[i].percent_drop).epsilon(1e-9));
    }
  }
}

TEST_CASE("detector is translation covariant") {
  const auto base = plateau_series(60, 100, 80, 45000, 55000, 200000);
  auto shifted = base;
  for (auto& t : shifted.steps) t += 35000;
  const auto a = detect_mining_events(base.steps, base.values, DetectorSettings{});
  const auto b = detect_mining_events(shifted.steps, shifted.values, DetectorSettings{});
  REQUIRE(a.size() == 1);
  REQUIRE(b.size() == 1);
  CHECK(b[0].onset_step == a[0].onset_step + 35000);
  CHECK(b[0].peak_step == a[0].peak_step + 35000);
}

TEST_CASE("two separated declines give two increasing onsets") {
  auto first = plateau_series(60, 100, 70, 45000, 55000, 150000);
  const auto second = plateau_series(70, 120, 60, 245000, 255000, 400000);
  for (std::size_t i = 0; i < second.steps.size(); ++i) {
    if (second.steps[i] <= 150000) continue;
    first.steps.push_back(second.steps[i]);
    first.values.push_back(second.values[i]);
  }
  const auto events = detect_mining_events(first.steps, first.values, DetectorSettings{});
  REQUIRE(events.size() == 2);
  CHECK(events[0].onset_step < events[1].onset_step);
  for (const auto& e : events) CHECK(e.percent_drop >= 10.0);
}

TEST_CASE("onset rounds to the nearest 5000") {
  const auto s = plateau_series(60, 100, 80, 34600, 35600, 200000);
  const auto events = detect_mining_events(s.steps, s.values, DetectorSettings{});
  REQUIRE(events.size() == 1);
  CHECK(events[0].onset_step == 35000);
  CHECK(events[0].onset_step % 5000 == 0);
}

TEST_CASE("detector input checks") {
  const std::vector<std::uint64_t> none;
  const std::vector<double> empty;
  CHECK_THROWS_AS(detect_mining_events(none, empty, DetectorSettings{}), std::invalid_argument);
  const std::vector<std::uint64_t> two = {0, 100};
  const std::vector<double> one = {1.0};
  CHECK_THROWS_AS(detect_mining_events(two, one, DetectorSettings{}), std::invalid_argument);
  const std::vector<double> flat_zero = {0.0, 0.0};
  CHECK(detect_mining_events(two, flat_zero, DetectorSettings{}).empty());
}

TEST_CASE("smoothing keeps constants and truncates at the ends") {
  const std::vector<double> v = {1, 2, 3, 4, 5};
  const auto s = smooth_series(v, 1);
  CHECK(s[0] == 1.5);
  CHECK(s[2] == 3.0);
  CHECK(s[4] == 4.5);
  CHECK(smooth_series(v, 0) == v);
}

TEST_CASE("extinction detection") {
  const std::vector<std::uint64_t> steps = {0, 100, 200};
  CHECK_FALSE(detect_extinction(steps, std::vector<std::uint32_t>{5, 4, 1}));
  CHECK(detect_extinction(steps, std::vector<std::uint32_t>{0, 0, 0}) == 0u);
  std::vector<std::uint64_t> long_steps;
  std::vector<std::uint32_t> pop;
  for (std::uint64_t t = 0; t <= 200000; t += 5000) {
    long_steps.push_back(t);
    pop.push_back(t >= 185000 ? 0 : 40);
  }
  CHECK(detect_extinction(long_steps, pop) == 185000u);
}

TEST_CASE("record_metrics examples") {
  SimConfig cfg;
  WorldState w;
  w.map.size = 16;
  w.map.rock.assign(256, 0);
  w.map.water.assign(256, 0);
  w.map.energy.assign(256, 0);
  w.map.biomass.assign(256, 10);
  w.map.occupancy.assign(256, kEmptyCell);
  w.map.water[0] = 100;  // one wet cell
  w.agents = AgentTable(4);
  const auto s = w.agents.allocate();
  w.agents[s].store_biomass = 22;
  w.agents[s].hp = 80.0f;
  w.agents[s].age = 10;

  TraceWindow window;
  StepTrace rest;
  rest.actions[static_cast<int>(Action::Rest)] = 1;
  window.add(rest);
  window.add(rest);
  auto r = record_metrics(w, cfg, window);
  CHECK(r.frac_rest == 1.0);
  CHECK(r.frac_move == 0.0);
  CHECK(r.free_wet_biomass == 10);
  CHECK(r.free_dry_biomass == 2550);
  CHECK(r.agent_biomass == 22 + cfg.resources.base_biomass);
  CHECK(r.free_dry_biomass + r.free_wet_biomass + r.agent_biomass == r.total_biomass);
  CHECK(r.biomass_utilization == doctest::Approx(150.0 / 2710.0));
  CHECK(r.mean_hp == 80.0);
  CHECK(r.mean_age == 10.0);

  TraceWindow fights;
  StepTrace t;
  t.attacks = 4;
  t.kills = 3;
  t.deaths_attack = 3;
  t.actions[static_cast<int>(Action::Attack)] = 4;
  fights.add(t);
  r = record_metrics(w, cfg, fights);
  CHECK(r.homicides_per_attack == 0.75);
  CHECK(r.frac_attack == 1.0);

  w.agents.release(s);
  r = record_metrics(w, cfg, TraceWindow{});
  CHECK(r.population == 0);
  CHECK(r.biomass_utilization == 0.0);
}

TEST_CASE("summaries") {
  auto run = [](const char* cfg, bool mined, bool extinct, std::uint64_t onset = 50000) {
    RunResult r;
    r.configuration = cfg;
    if (mined) r.report.mining.push_back({onset, 20.0, onset, onset + 10000});
    if (extinct) r.report.extinction_step = 185000;
    r.report.aggregates.mean_utilization = 0.25;
    return r;
  };
  std::vector<RunResult> four = {run("beach_rc_256", true, false, 35000), run("beach_rc_256", true, false, 40000),
                                 run("beach_rc_256", true, true), run("beach_rc_256", true, true)};
  auto rows = summarize_runs(four);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].mining_runs == 4);
  CHECK(rows[0].extinct_runs == 2);
  CHECK(*rows[0].mean_onset == doctest::Approx((35000 + 40000 + 50000 + 50000) / 4.0));
  CHECK(rows[0].mean_utilization == doctest::Approx(0.25));
  const auto csv = summary_csv(rows);
  CHECK(csv.find(",4/4,2/4,") != std::string::npos);

  std::vector<RunResult> quiet = {run("beach_r_128", false, true), run("beach_r_128", false, false)};
  rows = summarize_runs(quiet);
  CHECK_FALSE(rows[0].mean_onset.has_value());
  CHECK_FALSE(rows[0].mean_drop.has_value());
  CHECK(summary_csv(rows).find("beach_r_128,2,0/2,1/2,,,") != std::string::npos);

  CHECK_THROWS_AS(summarize_runs(std::vector<RunResult>{}), std::invalid_argument);

  std::vector<RunResult> mixed = {run("a", true, false), run("b", false, false), run("a", false, true)};
  rows = summarize_runs(mixed);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].configuration == "a");
  CHECK(rows[0].runs == 2);
  CHECK(rows[1].runs == 1);
}
