#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ecosim/io.hpp"
#include "json.hpp"

namespace ecosim {

namespace {

constexpr const char* kColumns[] = {
    "step",          "population",         "free_dry_biomass", "free_wet_biomass",
    "agent_biomass", "total_biomass",      "total_water",      "biomass_utilization",
    "frac_move",     "frac_eat",           "frac_attack",      "frac_rest",
    "frac_reproduce", "attacks",           "homicides",        "homicides_per_attack",
    "births",        "deaths_attack",      "deaths_starvation", "deaths_age",
    "mean_hp",       "mean_age"};
constexpr std::size_t kColumnCount = std::size(kColumns);

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <class T>
T parse_int(const std::string& s) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("bad integer field '" + s + "' in metrics CSV");
  }
  return v;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("bad numeric field '" + s + "' in metrics CSV");
  }
}

}  // namespace

std::string metrics_csv_header() {
  std::string header;
  for (std::size_t i = 0; i < kColumnCount; ++i) {
    if (i > 0) header += ',';
    header += kColumns[i];
  }
  return header;
}

std::string metrics_csv_row(const MetricsRecord& r) {
  std::ostringstream out;
  out << r.step << ',' << r.population << ',' << r.free_dry_biomass << ',' << r.free_wet_biomass
      << ',' << r.agent_biomass << ',' << r.total_biomass << ',' << r.total_water << ','
      << num(r.biomass_utilization) << ',' << num(r.frac_move) << ',' << num(r.frac_eat) << ','
      << num(r.frac_attack) << ',' << num(r.frac_rest) << ',' << num(r.frac_reproduce) << ','
      << r.attacks << ',' << r.homicides << ',' << num(r.homicides_per_attack) << ',' << r.births
      << ',' << r.deaths_attack << ',' << r.deaths_starvation << ',' << r.deaths_age << ','
      << num(r.mean_hp) << ',' << num(r.mean_age);
  return out.str();
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRecord> records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# ecosim metrics v" << kMetricsCsvVersion << '\n' << metrics_csv_header() << '\n';
  for (const auto& r : records) out << metrics_csv_row(r) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  const std::string version_line = "# ecosim metrics v" + std::to_string(kMetricsCsvVersion);
  if (line != version_line) {
    throw std::runtime_error(path.string() + ": unsupported metrics file version line '" + line + "'");
  }
  std::getline(in, line);
  if (line != metrics_csv_header()) throw std::runtime_error(path.string() + ": unexpected columns");
  std::vector<MetricsRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != kColumnCount) throw std::runtime_error(path.string() + ": short row");
    MetricsRecord r;
    std::size_t i = 0;
    r.step = parse_int<std::uint64_t>(f[i++]);
    r.population = parse_int<std::uint32_t>(f[i++]);
    r.free_dry_biomass = parse_int<Units>(f[i++]);
    r.free_wet_biomass = parse_int<Units>(f[i++]);
    r.agent_biomass = parse_int<Units>(f[i++]);
    r.total_biomass = parse_int<Units>(f[i++]);
    r.total_water = parse_int<Units>(f[i++]);
    r.biomass_utilization = parse_double(f[i++]);
    r.frac_move = parse_double(f[i++]);
    r.frac_eat = parse_double(f[i++]);
    r.frac_attack = parse_double(f[i++]);
    r.frac_rest = parse_double(f[i++]);
    r.frac_reproduce = parse_double(f[i++]);
    r.attacks = parse_int<std::uint64_t>(f[i++]);
    r.homicides = parse_int<std::uint64_t>(f[i++]);
    r.homicides_per_attack = parse_double(f[i++]);
    r.births = parse_int<std::uint64_t>(f[i++]);
    r.deaths_attack = parse_int<std::uint64_t>(f[i++]);
    r.deaths_starvation = parse_int<std::uint64_t>(f[i++]);
    r.deaths_age = parse_int<std::uint64_t>(f[i++]);
    r.mean_hp = parse_double(f[i++]);
    r.mean_age = parse_double(f[i++]);
    records.push_back(r);
  }
  return records;
}

std::string event_report_json(const EventReport& report, const std::string& configuration,
                              std::uint64_t seed) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : report.mining) {
    events.push_back({{"onset_step", e.onset_step},
                      {"percent_drop", e.percent_drop},
                      {"peak_step", e.peak_step},
                      {"trough_step", e.trough_step}});
  }
  const auto& a = report.aggregates;
  nlohmann::json doc = {
      {"configuration", configuration},
      {"seed", seed},
      {"mining_events", events},
      {"extinction_step",
       report.extinction_step ? nlohmann::json(*report.extinction_step) : nlohmann::json(nullptr)},
      {"aggregates",
       {{"mean_population", a.mean_population},
        {"mean_utilization", a.mean_utilization},
        {"mean_homicides_per_attack", a.mean_homicides_per_attack},
        {"mean_attacks_per_agent", a.mean_attacks_per_agent},
        {"mean_move_fraction", a.mean_move_fraction},
        {"mean_eat_fraction", a.mean_eat_fraction},
        {"final_step", a.final_step},
        {"final_population", a.final_population}}},
  };
  return doc.dump(2);
}

}  // namespace ecosim
