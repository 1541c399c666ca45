#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "netdiag/channel.hpp"
#include "netdiag/dof.hpp"

namespace netdiag {

enum class Mode {
  diagonalize,
  simulate_tv,
  simulate_const,
  dof_sweep,
  baselines,
  mimo_region,
  multihop,
};

Mode mode_from_name(const std::string& name);
std::string mode_name(Mode mode);

// "normal" or "uniform:<lo>:<hi>".
GainDistribution parse_dist(const std::string& spec);

struct ExperimentConfig {
  Mode mode = Mode::baselines;
  int k = 2;
  int n = 1;
  double epsilon = 0.1;
  std::vector<double> p_grid = {1e4};
  double sigma2 = 1.0;
  int trials = 100;
  std::uint64_t seed = 1;
  GainDistribution dist = default_gain_distribution();
  std::string out_path;          // empty = stdout
  std::string format = "csv";    // csv | json
  int jobs = 1;

  int calib_trials = 5000;  // Monte Carlo threshold calibration
  int blocks = 200;         // simulate-tv block count
  int k_max = 10;           // baselines table size
  MimoProfile mimo{2, {1, 1}, {1, 1}, {1, 1}};
  std::vector<int> layers;  // multihop middle layers

  double enum_budget = 1e8;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

struct Diagnostic {
  std::string field;
  std::string message;
  bool budget = false;  // budget misses exit 3, other validation exits 2
};

// Every envelope violation, with no computation performed.
std::vector<Diagnostic> validate(const ExperimentConfig& cfg);

class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }
  bool any_budget() const;

 private:
  std::vector<Diagnostic> diags_;
};

struct Report {
  std::string mode;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::map<std::string, double> aggregates;
};

// Runs the mode named in the config; throws ValidationError on any
// envelope violation and BudgetExceeded when an enumeration blows the cap.
Report run(const ExperimentConfig& cfg);

// The CSV body is a pure function of the config: header row, then data
// rows, then one "# aggregate,<name>,<value>" comment line each.
void write_csv(const Report& report, std::ostream& os);

// JSON report with provenance (config echo, version, wall clock). Only
// provenance.wall_clock_utc varies between identical runs.
nlohmann::json report_to_json(const Report& report,
                              const ExperimentConfig& cfg);

// Writes to cfg.out_path (or stdout when empty) in cfg.format.
void write_report(const Report& report, const ExperimentConfig& cfg);

}  // namespace netdiag
