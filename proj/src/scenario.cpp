#include "sdarray/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace sdarray {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

bool parse_plain_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

// Accepts "x" or "x/y" so captions such as lambda/2000 can be written as 1/2000.
bool parse_number(const std::string& raw, double& out) {
  const std::string s = trim(raw);
  const auto slash = s.find('/');
  if (slash == std::string::npos) return parse_plain_number(s, out);
  double num = 0.0;
  double den = 0.0;
  if (!parse_plain_number(trim(s.substr(0, slash)), num) ||
      !parse_plain_number(trim(s.substr(slash + 1)), den) || den == 0.0) {
    return false;
  }
  out = num / den;
  return true;
}

}  // namespace

KeyValueDocument KeyValueDocument::parse(std::istream& is, const std::string& source_name) {
  KeyValueDocument doc;
  doc.source_ = source_name;
  std::string section;
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    std::ostringstream os;
    os << source_name << ":" << line_no << ": " << why;
    throw ConfigError(os.str());
  };
  while (std::getline(is, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      if (doc.sections_.count(section)) fail("duplicate section [" + section + "]");
      doc.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    if (section.empty()) fail("key outside of any [section]");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("missing key");
    if (value.empty()) fail("missing value for '" + key + "'");
    auto& entries = doc.sections_[section];
    if (entries.count(key)) fail("duplicate key '" + key + "' in [" + section + "]");
    entries[key] = Entry{value, line_no, false};
  }
  return doc;
}

KeyValueDocument KeyValueDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in, path.string());
}

const KeyValueDocument::Entry* KeyValueDocument::find(const std::string& section,
                                                      const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  const auto e = s->second.find(key);
  if (e == s->second.end()) return nullptr;
  e->second.used = true;  // bookkeeping only
  return &e->second;
}

void KeyValueDocument::fail(const Entry& e, const std::string& key, const std::string& why) const {
  std::ostringstream os;
  os << source_ << ":" << e.line << ": '" << key << "' " << why;
  throw ConfigError(os.str());
}

bool KeyValueDocument::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

double KeyValueDocument::number(const std::string& section, const std::string& key,
                                double fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  double v = 0.0;
  if (!parse_number(e->value, v)) fail(*e, key, "is not a number: " + e->value);
  return v;
}

double KeyValueDocument::number(const std::string& section, const std::string& key) const {
  if (!find(section, key)) {
    throw ConfigError(source_ + ": missing required key '" + key + "' in [" + section + "]");
  }
  return number(section, key, 0.0);
}

double KeyValueDocument::number_or_inf(const std::string& section, const std::string& key,
                                       double fallback) const {
  const Entry* e = find(section, key);
  if (e && trim(e->value) == "inf") return std::numeric_limits<double>::infinity();
  return number(section, key, fallback);
}

std::string KeyValueDocument::text(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  const std::string& v = e->value;
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') {
    fail(*e, key, "must be a quoted string");
  }
  return v.substr(1, v.size() - 2);
}

std::vector<double> KeyValueDocument::numbers(const std::string& section,
                                              const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return {};
  const std::string& v = e->value;
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') fail(*e, key, "must be a [list]");
  std::vector<double> out;
  std::istringstream items(v.substr(1, v.size() - 2));
  std::string item;
  while (std::getline(items, item, ',')) {
    if (trim(item).empty()) continue;
    double x = 0.0;
    if (!parse_number(item, x)) fail(*e, key, "has a non-numeric entry: " + trim(item));
    out.push_back(x);
  }
  if (out.empty()) fail(*e, key, "is an empty list");
  return out;
}

void KeyValueDocument::reject_unused() const {
  for (const auto& [section, entries] : sections_) {
    for (const auto& [key, e] : entries) {
      if (!e.used) fail(e, key, "is not a recognised key in [" + section + "]");
    }
  }
}

namespace {

template <typename Enum>
Enum pick(const std::string& value, const std::vector<std::pair<std::string, Enum>>& options,
          const std::string& what) {
  for (const auto& [name, e] : options) {
    if (name == value) return e;
  }
  std::string allowed;
  for (const auto& [name, e] : options) allowed += (allowed.empty() ? "" : "|") + name;
  throw ConfigError(what + " must be one of " + allowed + ", got '" + value + "'");
}

const char* sweep_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::n: return "n";
    case SweepVariable::d_over_lambda: return "d_over_lambda";
    case SweepVariable::ell_over_lambda: return "ell_over_lambda";
    case SweepVariable::rho_over_lambda: return "rho_over_lambda";
  }
  return "?";
}

double deg_to_rad(double deg) { return deg / 180.0 * kPi; }

}  // namespace

ScenarioConfig ScenarioConfig::from_document(const KeyValueDocument& doc) {
  ScenarioConfig c;
  c.name = doc.text("scenario", "name", c.name);
  c.frequency = doc.number("carrier", "frequency_hz", c.frequency);
  c.ell_over_lambda = doc.number("element", "ell_over_lambda", c.ell_over_lambda);
  c.rho_over_lambda = doc.number("element", "rho_over_lambda", c.rho_over_lambda);
  c.conductivity = doc.number_or_inf("element", "conductivity_s_per_m", c.conductivity);

  const double n = doc.number("array", "n", c.n);
  if (n != std::floor(n) || n < 1.0 || n > 1000.0) throw ConfigError("[array] n must be an integer in [1, 1000]");
  c.n = static_cast<int>(n);
  c.d_over_lambda = doc.number("array", "d_over_lambda", c.d_over_lambda);

  c.range = doc.number("link", "range_m", c.range);
  c.theta = deg_to_rad(doc.number("link", "theta_deg", 90.0));
  c.phi = deg_to_rad(doc.number("link", "phi_deg", 0.0));
  c.power_budget = doc.number("link", "power_budget_w", c.power_budget);
  c.bandwidth = doc.number("link", "bandwidth_hz", c.bandwidth);
  c.noise_density_dbm_hz = doc.number("link", "noise_density_dbm_per_hz", c.noise_density_dbm_hz);

  c.match = pick<MatchMode>(doc.text("matching", "mode", "active_conjugate"),
                            {{"active_conjugate", MatchMode::active_conjugate},
                             {"input_conjugate", MatchMode::input_conjugate}},
                            "[matching] mode");
  c.coupling = pick<CouplingSelector>(doc.text("model", "coupling", "coupled"),
                                      {{"coupled", CouplingSelector::coupled},
                                       {"uncoupled", CouplingSelector::uncoupled},
                                       {"both", CouplingSelector::both}},
                                      "[model] coupling");
  c.model = pick<ModelSelector>(doc.text("model", "kind", "scd"),
                                {{"scd", ModelSelector::scd},
                                 {"mom", ModelSelector::mom},
                                 {"both", ModelSelector::both}},
                                "[model] kind");
  const double samples = doc.number("model", "samples", c.samples);
  if (samples != std::floor(samples)) throw ConfigError("[model] samples must be an integer");
  c.samples = static_cast<int>(samples);

  if (doc.has("sweep", "variable")) {
    c.sweep = pick<SweepVariable>(doc.text("sweep", "variable", ""),
                                  {{"n", SweepVariable::n},
                                   {"d_over_lambda", SweepVariable::d_over_lambda},
                                   {"ell_over_lambda", SweepVariable::ell_over_lambda},
                                   {"rho_over_lambda", SweepVariable::rho_over_lambda}},
                                  "[sweep] variable");
    const bool listed = doc.has("sweep", "values");
    const bool ranged = doc.has("sweep", "start") || doc.has("sweep", "stop") || doc.has("sweep", "step");
    if (listed == ranged) {
      throw ConfigError("[sweep] needs either 'values' or 'start', 'stop' and 'step'");
    }
    if (listed) {
      c.sweep_values = doc.numbers("sweep", "values");
    } else {
      const double start = doc.number("sweep", "start");
      const double stop = doc.number("sweep", "stop");
      const double step = doc.number("sweep", "step");
      if (!(step > 0.0) || !(stop >= start)) throw ConfigError("[sweep] requires step > 0 and stop >= start");
      const double count = (stop - start) / step;
      const double whole = std::round(count);
      if (std::abs(count - whole) > 1e-9 * std::max(1.0, count)) {
        throw ConfigError("[sweep] (stop - start) must be a whole number of steps");
      }
      for (int i = 0; i <= static_cast<int>(whole); ++i) c.sweep_values.push_back(start + i * step);
    }
  } else if (doc.has("sweep", "values") || doc.has("sweep", "start")) {
    throw ConfigError("[sweep] needs a 'variable'");
  }

  c.pattern_step_deg = doc.number("pattern", "step_deg", c.pattern_step_deg);
  c.output_dir = doc.text("output", "directory", "");
  doc.reject_unused();
  c.validate();
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
  ScenarioConfig c = from_document(KeyValueDocument::load(path));
  if (c.name == "scenario") c.name = path.stem().string();
  return c;
}

void ScenarioConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(frequency, "[carrier] frequency_hz");
  positive(ell_over_lambda, "[element] ell_over_lambda");
  positive(rho_over_lambda, "[element] rho_over_lambda");
  if (!(conductivity > 0.0)) throw ConfigError("[element] conductivity_s_per_m must be positive");
  positive(d_over_lambda, "[array] d_over_lambda");
  positive(range, "[link] range_m");
  positive(power_budget, "[link] power_budget_w");
  positive(bandwidth, "[link] bandwidth_hz");
  positive(pattern_step_deg, "[pattern] step_deg");
  if (!std::isfinite(noise_density_dbm_hz)) throw ConfigError("[link] noise_density_dbm_per_hz must be finite");
  if (!std::isfinite(phi)) throw ConfigError("[link] phi_deg must be finite");
  if (theta < 0.0 || theta > kPi) throw ConfigError("[link] theta_deg must lie in [0, 180]");
  if (model != ModelSelector::scd) {
    if (coupling != CouplingSelector::coupled) {
      throw ConfigError("[model] kind = mom/both requires coupling = \"coupled\"");
    }
    if (samples < 21 || samples % 2 == 0) throw ConfigError("[model] samples must be odd and >= 21");
  }
  for (double v : sweep_values) {
    if (!(v > 0.0)) throw ConfigError("[sweep] values must be positive");
    if (sweep == SweepVariable::n && (v != std::floor(v) || v > 1000.0)) {
      throw ConfigError("[sweep] values of n must be integers in [1, 1000]");
    }
  }
  auto sorted = sweep_values;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("[sweep] values must be distinct");
  }
}

LinkSpec ScenarioConfig::link() const {
  return LinkSpec{bandwidth, dbm_to_watts(noise_density_dbm_hz), power_budget, range, direction()};
}

ScenarioConfig ScenarioConfig::at(double value) const {
  ScenarioConfig c = *this;
  switch (sweep) {
    case SweepVariable::n: c.n = static_cast<int>(value); break;
    case SweepVariable::d_over_lambda: c.d_over_lambda = value; break;
    case SweepVariable::ell_over_lambda: c.ell_over_lambda = value; break;
    case SweepVariable::rho_over_lambda: c.rho_over_lambda = value; break;
  }
  c.sweep_values.clear();
  return c;
}

ArrayGeometry ScenarioConfig::geometry() const {
  const double lambda = carrier().wavelength();
  return ArrayGeometry::uniform_linear(static_cast<std::size_t>(n), d_over_lambda * lambda,
                                       {ell_over_lambda * lambda, rho_over_lambda * lambda, conductivity});
}

std::vector<double> ScenarioConfig::sweep_points() const {
  if (!sweep_values.empty()) {
    auto v = sweep_values;
    std::sort(v.begin(), v.end());
    return v;
  }
  switch (sweep) {
    case SweepVariable::n: return {static_cast<double>(n)};
    case SweepVariable::d_over_lambda: return {d_over_lambda};
    case SweepVariable::ell_over_lambda: return {ell_over_lambda};
    case SweepVariable::rho_over_lambda: return {rho_over_lambda};
  }
  return {};
}

SweepResultRow evaluate_point(const ScenarioConfig& cfg, const ImpedanceSet& set, bool coupled) {
  const Direction dir = cfg.direction();
  const MatchSpec match{cfg.match, {}};
  const ExcitationSolution s = solve_excitation(set, match, dir, cfg.power_budget);

  SweepResultRow row;
  row.coupled = coupled;
  row.gain = s.gain;
  row.efficiency = s.efficiency;
  row.powers = s.powers;
  row.rate = received_power_and_rate(cfg.link(), set.carrier.wavelength(), s.efficiency, s.gain).rate;
  for (Eigen::Index n = 0; n < s.currents.size(); ++n) {
    row.current_magnitudes.push_back(std::abs(s.currents[n]));
    row.reflection_magnitudes.push_back(std::abs(s.reflection[n]));
  }

  // Bookkeeping re-checked at the output boundary.
  const double scale = std::max(row.powers.input, std::numeric_limits<double>::min());
  if (std::abs(row.powers.input - row.powers.radiated - row.powers.loss) > 1e-12 * scale) {
    throw ConsistencyError("P_in != P_rad + P_loss");
  }
  if (cfg.match == MatchMode::active_conjugate && row.efficiency > 0.5 + 1e-12) {
    throw ConsistencyError("matching efficiency exceeds 1/2 under conjugate matching");
  }

  if (coupled && cfg.model != ModelSelector::scd) {
    const MomDiscretization disc = MomDiscretization::from_samples(cfg.samples);
    row.gain_mom = mom_gain_pipeline(set, dir, cfg.power_budget, disc, match).gain;
  }
  return row;
}

namespace {

// Runs jobs on a small worker pool; results stay in job order.
template <typename Job>
void parallel_for(std::size_t count, Job&& job) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioResult result;
  result.config = cfg;
  std::vector<std::pair<double, bool>> jobs;
  for (double v : cfg.sweep_points()) {
    if (cfg.coupling != CouplingSelector::uncoupled) jobs.emplace_back(v, true);
    if (cfg.coupling != CouplingSelector::coupled) jobs.emplace_back(v, false);
  }
  result.rows.resize(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    const auto [value, coupled] = jobs[i];
    const ScenarioConfig point = cfg.at(value);
    const ArrayGeometry geom = point.geometry();
    const ImpedanceSet set = coupled ? input_impedance_matrix(geom, point.carrier())
                                     : uncoupled(geom, point.carrier());
    result.rows[i] = evaluate_point(point, set, coupled);
    result.rows[i].sweep_value = value;
  });
  return result;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + fmt(v[i]);
  return s;
}

}  // namespace

void write_sweep_csv(std::ostream& os, const ScenarioResult& result) {
  const bool with_mom = result.config.model != ModelSelector::scd;
  os << sweep_name(result.config.sweep)
     << ",coupling,g_max_linear,g_max_dbi,eta,p_rad_w,p_loss_w,p_in_w,p_total_w,rate_bps,"
        "i_abs_a,gamma_abs";
  if (with_mom) os << ",g_mom_linear,g_mom_dbi";
  os << '\n';
  for (const auto& r : result.rows) {
    os << fmt(r.sweep_value) << ',' << (r.coupled ? "coupled" : "uncoupled") << ',' << fmt(r.gain)
       << ',' << fmt(to_db(r.gain)) << ',' << fmt(r.efficiency) << ',' << fmt(r.powers.radiated)
       << ',' << fmt(r.powers.loss) << ',' << fmt(r.powers.input) << ',' << fmt(r.powers.total)
       << ',' << fmt(r.rate) << ',' << join(r.current_magnitudes) << ','
       << join(r.reflection_magnitudes);
    if (with_mom) os << ',' << fmt(r.gain_mom) << ',' << fmt(to_db(r.gain_mom));
    os << '\n';
  }
}

std::vector<PatternSample> emit_pattern(const ImpedanceSet& set, const ComplexVector& currents,
                                        PatternCut cut, double step_deg) {
  if (!(step_deg > 0.0)) throw DomainError("pattern step must be positive");
  auto steps = [&](double span) {
    const double count = span / step_deg;
    if (std::abs(count - std::round(count)) > 1e-9 * count) {
      throw DomainError("pattern step must divide the angular range evenly");
    }
    return static_cast<int>(std::round(count));
  };
  std::vector<PatternSample> out;
  auto add = [&](double theta_deg, double phi_deg) {
    const Direction d{deg_to_rad(theta_deg), deg_to_rad(phi_deg)};
    out.push_back({theta_deg, phi_deg, to_db(array_gain(set, d, currents))});
  };
  const int n_theta = steps(180.0);
  const int n_phi = steps(360.0);
  switch (cut) {
    case PatternCut::azimuth:
      for (int j = 0; j <= n_phi; ++j) add(90.0, -180.0 + j * step_deg);
      break;
    case PatternCut::elevation:
      for (int i = 0; i <= n_theta; ++i) add(i * step_deg, 0.0);
      break;
    case PatternCut::grid:
      for (int i = 0; i <= n_theta; ++i) {
        for (int j = 0; j <= n_phi; ++j) add(i * step_deg, -180.0 + j * step_deg);
      }
      break;
  }
  return out;
}

void write_pattern_csv(std::ostream& os, const std::vector<PatternSample>& samples, PatternCut cut) {
  switch (cut) {
    case PatternCut::azimuth: os << "phi_deg,gain_dbi\n"; break;
    case PatternCut::elevation: os << "theta_deg,gain_dbi\n"; break;
    case PatternCut::grid: os << "theta_deg,phi_deg,gain_dbi\n"; break;
  }
  for (const auto& s : samples) {
    switch (cut) {
      case PatternCut::azimuth: os << fmt(s.phi_deg); break;
      case PatternCut::elevation: os << fmt(s.theta_deg); break;
      case PatternCut::grid: os << fmt(s.theta_deg) << ',' << fmt(s.phi_deg); break;
    }
    os << ',' << fmt(s.gain_dbi) << '\n';
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("failed while writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace sdarray
