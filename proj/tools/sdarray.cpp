#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "sdarray/scenario.hpp"

using namespace sdarray;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::filesystem::path output_dir(const std::string& flag, const ScenarioConfig& cfg) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("SDARRAY_OUTPUT_DIR"); env && *env) return env;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  return "out";
}

void warn_far_field(const ScenarioConfig& cfg) {
  if (auto w = far_field_warning(cfg.geometry(), cfg.carrier(), cfg.range)) {
    std::cerr << "warning: " << *w << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Superdirective dipole array simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_flag;
  std::string model_flag;
  int samples = 0;
  auto* run = app.add_subcommand("run", "Evaluate a scenario sweep and write a CSV table");
  run->add_option("config", config_path, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--model", model_flag, "Override the model")->check(CLI::IsMember({"scd", "mom", "both"}));
  run->add_option("--out", out_flag, "Output directory (default: $SDARRAY_OUTPUT_DIR, then [output] directory, then ./out)");
  run->add_option("--samples", samples, "MoM samples per dipole, 2M+1");

  std::string cut_flag;
  double step = 0.0;
  auto* pattern = app.add_subcommand("pattern", "Write a gain pattern of the optimal excitation");
  pattern->add_option("config", config_path, "Scenario file")->required()->check(CLI::ExistingFile);
  pattern->add_option("--cut", cut_flag, "Pattern cut")
      ->required()
      ->check(CLI::IsMember({"azimuth", "elevation", "grid"}));
  pattern->add_option("--step", step, "Angular step in degrees (default from config, 1)");
  pattern->add_option("--out", out_flag, "Output directory (default: $SDARRAY_OUTPUT_DIR, then [output] directory, then ./out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    ScenarioConfig cfg = ScenarioConfig::load(config_path);
    if (*run) {
      if (!model_flag.empty()) {
        cfg.model = model_flag == "scd" ? ModelSelector::scd
                    : model_flag == "mom" ? ModelSelector::mom
                                          : ModelSelector::both;
      }
      if (samples != 0) cfg.samples = samples;
      cfg.validate();
      warn_far_field(cfg);
      const ScenarioResult result = run_scenario(cfg);
      std::ostringstream csv;
      write_sweep_csv(csv, result);
      const auto path = output_dir(out_flag, cfg) / (cfg.name + ".csv");
      write_file_atomic(path, csv.str());
      std::cout << path.string() << " (" << result.rows.size() << " rows)\n";
    } else {
      if (cfg.sweep_values.size() > 1) {
        std::cerr << "note: pattern uses the base values; the sweep is ignored\n";
      }
      if (step > 0.0) cfg.pattern_step_deg = step;
      cfg.sweep_values.clear();
      cfg.validate();
      warn_far_field(cfg);
      const PatternCut cut = cut_flag == "azimuth" ? PatternCut::azimuth
                             : cut_flag == "elevation" ? PatternCut::elevation
                                                       : PatternCut::grid;
      const ArrayGeometry geom = cfg.geometry();
      const ImpedanceSet set = cfg.coupling == CouplingSelector::uncoupled
                                   ? uncoupled(geom, cfg.carrier())
                                   : input_impedance_matrix(geom, cfg.carrier());
      const ExcitationSolution sol =
          solve_excitation(set, MatchSpec{cfg.match, {}}, cfg.direction(), cfg.power_budget);
      std::ostringstream csv;
      write_pattern_csv(csv, emit_pattern(set, sol.currents, cut, cfg.pattern_step_deg), cut);
      const auto path = output_dir(out_flag, cfg) / (cfg.name + "_pattern_" + cut_flag + ".csv");
      write_file_atomic(path, csv.str());
      std::cout << path.string() << '\n';
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
