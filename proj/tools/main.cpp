// Batch experiment driver. Subcommands (or --mode) select the experiment;
// flags override config-file values. Exit codes: 0 success, 2 validation
// failure, 3 budget exceeded, 4 I/O failure.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "netdiag/errors.hpp"
#include "netdiag/experiment.hpp"

namespace {

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"netdiag: two-hop interference network experiments"};
  app.fallthrough();

  std::string config_path, mode_flag, dist_flag, p_grid_flag, layers_flag;
  std::string mimo_src_flag, mimo_dst_flag, mimo_relay_flag;
  std::string out_flag, format_flag;
  int k = 0, n = 0, trials = 0, jobs = 0, calib = 0, blocks = 0, k_max = 0;
  double epsilon = -1.0, sigma2 = -1.0;
  std::uint64_t seed = 0;

  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--mode", mode_flag, "experiment mode");
  app.add_option("--k", k, "source/relay/destination count");
  app.add_option("--n", n, "direction order N");
  app.add_option("--epsilon", epsilon, "erasure budget in (0,1)");
  app.add_option("--p-grid", p_grid_flag, "comma-separated transmit powers");
  app.add_option("--sigma2", sigma2, "per-hop noise variance");
  app.add_option("--trials", trials, "trial count");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--dist", dist_flag, "normal | uniform:<lo>:<hi>");
  app.add_option("--out", out_flag, "output path (default stdout)");
  app.add_option("--format", format_flag, "csv | json");
  app.add_option("--jobs", jobs, "parallel trial workers");
  app.add_option("--calib-trials", calib, "threshold calibration trials");
  app.add_option("--blocks", blocks, "simulated blocks (simulate-tv)");
  app.add_option("--k-max", k_max, "table size (baselines)");
  app.add_option("--layers", layers_flag, "multihop middle layers, e.g. 5,3");
  app.add_option("--mimo-src", mimo_src_flag, "per-source antenna counts");
  app.add_option("--mimo-dst", mimo_dst_flag, "per-destination antenna counts");
  app.add_option("--mimo-relay", mimo_relay_flag, "per-relay antenna counts");

  std::vector<CLI::App*> subs;
  for (const char* name :
       {"diagonalize", "simulate-tv", "simulate-const", "dof-sweep",
        "baselines", "mimo-region", "multihop"}) {
    subs.push_back(app.add_subcommand(name));
  }
  app.require_subcommand(0, 1);

  CLI11_PARSE(app, argc, argv);

  try {
    netdiag::ExperimentConfig cfg;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) {
        std::cerr << "error: cannot read config file " << config_path << "\n";
        return 4;
      }
      nlohmann::json j;
      f >> j;
      cfg = netdiag::config_from_json(j);
    }
    for (const CLI::App* sub : subs) {
      if (sub->parsed()) cfg.mode = netdiag::mode_from_name(sub->get_name());
    }
    if (app.count("--mode")) cfg.mode = netdiag::mode_from_name(mode_flag);
    if (app.count("--k")) cfg.k = k;
    if (app.count("--n")) cfg.n = n;
    if (app.count("--epsilon")) cfg.epsilon = epsilon;
    if (app.count("--p-grid")) cfg.p_grid = parse_double_list(p_grid_flag);
    if (app.count("--sigma2")) cfg.sigma2 = sigma2;
    if (app.count("--trials")) cfg.trials = trials;
    if (app.count("--seed")) cfg.seed = seed;
    if (app.count("--dist")) cfg.dist = netdiag::parse_dist(dist_flag);
    if (app.count("--out")) cfg.out_path = out_flag;
    if (app.count("--format")) cfg.format = format_flag;
    if (app.count("--jobs")) cfg.jobs = jobs;
    if (app.count("--calib-trials")) cfg.calib_trials = calib;
    if (app.count("--blocks")) cfg.blocks = blocks;
    if (app.count("--k-max")) cfg.k_max = k_max;
    if (app.count("--layers")) cfg.layers = parse_int_list(layers_flag);
    if (app.count("--mimo-src")) cfg.mimo.m_src = parse_int_list(mimo_src_flag);
    if (app.count("--mimo-dst")) cfg.mimo.m_dst = parse_int_list(mimo_dst_flag);
    if (app.count("--mimo-relay"))
      cfg.mimo.m_relay = parse_int_list(mimo_relay_flag);
    if (cfg.mode == netdiag::Mode::mimo_region) cfg.mimo.k = cfg.k;

    const netdiag::Report report = netdiag::run(cfg);
    netdiag::write_report(report, cfg);
    return 0;
  } catch (const netdiag::ValidationError& e) {
    for (const auto& d : e.diagnostics()) {
      std::cerr << "error: " << d.field << ": " << d.message << "\n";
    }
    return e.any_budget() ? 3 : 2;
  } catch (const netdiag::BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const netdiag::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
