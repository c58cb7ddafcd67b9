#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sdarray/mom.hpp"

namespace sdarray {

/// Sections of `[name]` holding `key = value` pairs, each remembering its line.
class KeyValueDocument {
 public:
  struct Entry {
    std::string value;
    int line = 0;
    mutable bool used = false;
  };

  static KeyValueDocument parse(std::istream& is, const std::string& source_name);
  static KeyValueDocument load(const std::filesystem::path& path);

  bool has(const std::string& section, const std::string& key) const;
  double number(const std::string& section, const std::string& key, double fallback) const;
  double number(const std::string& section, const std::string& key) const;
  /// As number(), but also accepts a bare `inf`.
  double number_or_inf(const std::string& section, const std::string& key, double fallback) const;
  std::string text(const std::string& section, const std::string& key,
                   const std::string& fallback) const;
  std::vector<double> numbers(const std::string& section, const std::string& key) const;

  /// Throws ConfigError naming the first key that was never read.
  void reject_unused() const;

 private:
  const Entry* find(const std::string& section, const std::string& key) const;
  [[noreturn]] void fail(const Entry& e, const std::string& key, const std::string& why) const;

  std::string source_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

enum class ModelSelector { scd, mom, both };
enum class CouplingSelector { coupled, uncoupled, both };
enum class SweepVariable { n, d_over_lambda, ell_over_lambda, rho_over_lambda };
enum class PatternCut { azimuth, elevation, grid };

struct ScenarioConfig {
  std::string name = "scenario";
  double frequency = 10e9;
  double ell_over_lambda = 0.5;
  double rho_over_lambda = 1.0 / 2000.0;
  double conductivity = 5.7e7;
  int n = 10;
  double d_over_lambda = 0.25;
  double range = 500.0;
  double theta = kPi / 2.0;
  double phi = 0.0;
  double power_budget = 0.2;
  double bandwidth = 1e9;
  double noise_density_dbm_hz = -174.0;
  MatchMode match = MatchMode::active_conjugate;
  CouplingSelector coupling = CouplingSelector::coupled;
  ModelSelector model = ModelSelector::scd;
  int samples = 401;
  SweepVariable sweep = SweepVariable::n;
  std::vector<double> sweep_values;  // empty: single point at the base values
  double pattern_step_deg = 1.0;
  std::string output_dir;            // empty: caller decides

  static ScenarioConfig from_document(const KeyValueDocument& doc);
  static ScenarioConfig load(const std::filesystem::path& path);

  /// Throws ConfigError for non-physical values or inconsistent selections.
  void validate() const;

  CarrierSpec carrier() const { return CarrierSpec(frequency); }
  Direction direction() const { return {theta, phi}; }
  LinkSpec link() const;

  /// Base values with the sweep variable set to `value`.
  ScenarioConfig at(double value) const;
  ArrayGeometry geometry() const;
  std::vector<double> sweep_points() const;
};

struct SweepResultRow {
  double sweep_value = 0.0;
  bool coupled = true;
  double gain = 0.0;  // linear, at the design direction
  double efficiency = 0.0;
  PowerBreakdown powers;
  double rate = 0.0;
  std::vector<double> current_magnitudes;
  std::vector<double> reflection_magnitudes;  // NaN where undefined
  double gain_mom = 0.0;                      // only meaningful with a MoM model
};

struct ScenarioResult {
  ScenarioConfig config;
  std::vector<SweepResultRow> rows;
};

/// Evaluates one operating point; the caller supplies the impedances.
SweepResultRow evaluate_point(const ScenarioConfig& cfg, const ImpedanceSet& set, bool coupled);

/// Evaluates every sweep point (concurrently), ordered by sweep value then coupling.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// CSV with one header line; MoM models add the g_mom columns.
void write_sweep_csv(std::ostream& os, const ScenarioResult& result);

struct PatternSample {
  double theta_deg;
  double phi_deg;
  double gain_dbi;
};

/// Gain pattern of a fixed excitation at the configured step.
std::vector<PatternSample> emit_pattern(const ImpedanceSet& set, const ComplexVector& currents,
                                        PatternCut cut, double step_deg = 1.0);

void write_pattern_csv(std::ostream& os, const std::vector<PatternSample>& samples, PatternCut cut);

/// Writes `content` to `path` through a sibling temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace sdarray
