#include "netdiag/experiment.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <thread>

#include "netdiag/constant.hpp"
#include "netdiag/errors.hpp"
#include "netdiag/time_varying.hpp"

namespace netdiag {

using nlohmann::json;

Mode mode_from_name(const std::string& name) {
  if (name == "diagonalize") return Mode::diagonalize;
  if (name == "simulate-tv") return Mode::simulate_tv;
  if (name == "simulate-const") return Mode::simulate_const;
  if (name == "dof-sweep") return Mode::dof_sweep;
  if (name == "baselines") return Mode::baselines;
  if (name == "mimo-region") return Mode::mimo_region;
  if (name == "multihop") return Mode::multihop;
  throw std::invalid_argument("unknown mode: " + name);
}

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::diagonalize: return "diagonalize";
    case Mode::simulate_tv: return "simulate-tv";
    case Mode::simulate_const: return "simulate-const";
    case Mode::dof_sweep: return "dof-sweep";
    case Mode::baselines: return "baselines";
    case Mode::mimo_region: return "mimo-region";
    case Mode::multihop: return "multihop";
  }
  return "?";
}

GainDistribution parse_dist(const std::string& spec) {
  if (spec == "normal") return GainDistribution::standard_normal();
  if (spec.rfind("uniform:", 0) == 0) {
    const std::string rest = spec.substr(8);
    const auto sep = rest.find(':');
    if (sep == std::string::npos) {
      throw std::invalid_argument("uniform needs 'uniform:<lo>:<hi>'");
    }
    return GainDistribution::uniform(std::stod(rest.substr(0, sep)),
                                     std::stod(rest.substr(sep + 1)));
  }
  throw std::invalid_argument("unknown distribution spec: " + spec);
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("mode")) cfg.mode = mode_from_name(j.at("mode"));
  cfg.k = j.value("k", cfg.k);
  cfg.n = j.value("n", cfg.n);
  cfg.epsilon = j.value("epsilon", cfg.epsilon);
  if (j.contains("p_grid")) cfg.p_grid = j.at("p_grid").get<std::vector<double>>();
  cfg.sigma2 = j.value("sigma2", cfg.sigma2);
  cfg.trials = j.value("trials", cfg.trials);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("dist")) cfg.dist = parse_dist(j.at("dist"));
  cfg.out_path = j.value("out", cfg.out_path);
  cfg.format = j.value("format", cfg.format);
  cfg.jobs = j.value("jobs", cfg.jobs);
  cfg.calib_trials = j.value("calib_trials", cfg.calib_trials);
  cfg.blocks = j.value("blocks", cfg.blocks);
  cfg.k_max = j.value("k_max", cfg.k_max);
  cfg.enum_budget = j.value("enum_budget", cfg.enum_budget);
  if (j.contains("layers")) cfg.layers = j.at("layers").get<std::vector<int>>();
  if (j.contains("mimo")) {
    const auto& m = j.at("mimo");
    cfg.mimo.k = m.value("k", cfg.k);
    cfg.mimo.m_src = m.at("m_src").get<std::vector<int>>();
    cfg.mimo.m_dst = m.at("m_dst").get<std::vector<int>>();
    cfg.mimo.m_relay = m.at("m_relay").get<std::vector<int>>();
  }
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["mode"] = mode_name(cfg.mode);
  j["k"] = cfg.k;
  j["n"] = cfg.n;
  j["epsilon"] = cfg.epsilon;
  j["p_grid"] = cfg.p_grid;
  j["sigma2"] = cfg.sigma2;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["dist"] = cfg.dist.describe();
  j["out"] = cfg.out_path;
  j["format"] = cfg.format;
  j["jobs"] = cfg.jobs;
  j["calib_trials"] = cfg.calib_trials;
  j["blocks"] = cfg.blocks;
  j["k_max"] = cfg.k_max;
  j["enum_budget"] = cfg.enum_budget;
  j["layers"] = cfg.layers;
  j["mimo"] = {{"k", cfg.mimo.k},
               {"m_src", cfg.mimo.m_src},
               {"m_dst", cfg.mimo.m_dst},
               {"m_relay", cfg.mimo.m_relay}};
  return j;
}

ValidationError::ValidationError(std::vector<Diagnostic> diags)
    : std::runtime_error("configuration rejected (" +
                         std::to_string(diags.size()) + " diagnostics)"),
      diags_(std::move(diags)) {}

bool ValidationError::any_budget() const {
  for (const auto& d : diags_)
    if (d.budget) return true;
  return false;
}

namespace {

bool is_sim_mode(Mode m) {
  return m == Mode::diagonalize || m == Mode::simulate_tv ||
         m == Mode::dof_sweep || m == Mode::simulate_const;
}

constexpr double kTvBlockLenCap = 1024;

}  // namespace

std::vector<Diagnostic> validate(const ExperimentConfig& cfg) {
  std::vector<Diagnostic> out;
  auto reject = [&](const std::string& field, const std::string& msg,
                    bool budget = false) {
    out.push_back({field, msg, budget});
  };

  if (cfg.format != "csv" && cfg.format != "json")
    reject("format", "must be csv or json");
  if (cfg.jobs < 1 || cfg.jobs > 64) reject("jobs", "must lie in [1, 64]");
  if (cfg.trials < 1) reject("trials", "must be >= 1");

  if (is_sim_mode(cfg.mode)) {
    if (cfg.k < 1 || cfg.k > 4) reject("k", "must lie in [1, 4]");
    if (cfg.n < 1 || cfg.n > 3) reject("n", "must lie in [1, 3]");
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
      reject("epsilon", "must lie strictly in (0, 1)");
    if (cfg.sigma2 < 0.0) reject("sigma2", "must be >= 0");
    if (cfg.p_grid.empty()) reject("p_grid", "must not be empty");
    for (double p : cfg.p_grid)
      if (!(p > 0.0)) reject("p_grid", "entries must be positive");
  }

  if ((cfg.mode == Mode::diagonalize || cfg.mode == Mode::simulate_tv ||
       cfg.mode == Mode::dof_sweep) &&
      cfg.k >= 1 && cfg.k <= 4 && cfg.n >= 1 && cfg.n <= 3) {
    const double d = std::pow(cfg.n + 1.0, cfg.k * cfg.k);
    if (d > kTvBlockLenCap) {
      reject("k,n",
             "block length d=" + std::to_string(static_cast<long>(d)) +
                 " exceeds the simulation envelope (" +
                 std::to_string(static_cast<long>(kTvBlockLenCap)) + ")",
             /*budget=*/true);
    }
    if (cfg.calib_trials < 1000) reject("calib_trials", "must be >= 1000");
  }
  if (cfg.mode == Mode::simulate_tv && cfg.blocks < 1)
    reject("blocks", "must be >= 1");
  if (cfg.mode == Mode::dof_sweep) {
    if (cfg.p_grid.size() < 4) {
      reject("p_grid", "slope estimation needs >= 4 grid points");
    } else {
      const auto [lo, hi] =
          std::minmax_element(cfg.p_grid.begin(), cfg.p_grid.end());
      if (*lo > 0 && std::log10(*hi / *lo) < 4.0 - 1e-9)
        reject("p_grid", "grid must span at least 4 decades");
    }
  }
  if (cfg.mode == Mode::simulate_const && cfg.k >= 1 && cfg.k <= 4 &&
      cfg.n >= 1 && cfg.n <= 3 && !cfg.p_grid.empty()) {
    for (double p : cfg.p_grid)
      if (!(p > 1.0)) reject("p_grid", "constant scheme needs P > 1");
    const double d = std::pow(cfg.n + 1.0, cfg.k * cfg.k);
    const double pmin = *std::min_element(cfg.p_grid.begin(), cfg.p_grid.end());
    const double pmax = *std::max_element(cfg.p_grid.begin(), cfg.p_grid.end());
    if (pmin > 1.0) {
      const double q =
          std::floor(std::pow(pmin, (1.0 - cfg.epsilon) /
                                        (2.0 * (d + cfg.epsilon))));
      if (q < 1.0) reject("p_grid", "P too small: symbol alphabet is empty");
      const double qmax =
          std::floor(std::pow(pmax, (1.0 - cfg.epsilon) /
                                        (2.0 * (d + cfg.epsilon))));
      // largest relay support has at most k * n^(k^2) directions
      const double support =
          std::min(static_cast<double>(cfg.k) * std::pow(cfg.n, cfg.k * cfg.k),
                   d);
      const double points =
          std::pow(2.0 * cfg.k * qmax + 1.0, support);
      if (points > cfg.enum_budget) {
        reject("k,n",
               "relay decode enumeration (" + std::to_string(points) +
                   " points) exceeds the budget; the exact-decode envelope is "
                   "K <= 2, N = 1",
               /*budget=*/true);
      }
    }
  }
  if (cfg.mode == Mode::baselines && (cfg.k_max < 1 || cfg.k_max > 64))
    reject("k_max", "must lie in [1, 64]");
  if (cfg.mode == Mode::mimo_region) {
    if (cfg.mimo.k < 1 ||
        cfg.mimo.m_src.size() != static_cast<std::size_t>(cfg.mimo.k) ||
        cfg.mimo.m_dst.size() != static_cast<std::size_t>(cfg.mimo.k) ||
        cfg.mimo.m_relay.empty())
      reject("mimo", "profile sizes must match k and have >= 1 relay");
    for (int v : cfg.mimo.m_src)
      if (v < 1) reject("mimo.m_src", "antenna counts must be >= 1");
    for (int v : cfg.mimo.m_dst)
      if (v < 1) reject("mimo.m_dst", "antenna counts must be >= 1");
    for (int v : cfg.mimo.m_relay)
      if (v < 1) reject("mimo.m_relay", "antenna counts must be >= 1");
  }
  if (cfg.mode == Mode::multihop) {
    if (cfg.k < 1) reject("k", "must be >= 1");
    for (int a : cfg.layers)
      if (a < 1) reject("layers", "widths must be >= 1");
  }
  return out;
}

namespace {

void parallel_for(int items, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || items <= 1) {
    for (int i = 0; i < items; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(jobs, items);
  pool.reserve(workers);
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= items || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

double cause_code(ErasureCause c) { return static_cast<double>(c); }

Report run_baselines(const ExperimentConfig& cfg) {
  Report rep;
  rep.mode = mode_name(cfg.mode);
  rep.columns = {"k"};
  const Scheme schemes[] = {Scheme::tdma, Scheme::interference_channel,
                            Scheme::x_channel, Scheme::neutralization,
                            Scheme::aligned_diag};
  const std::string names[] = {"tdma", "ic", "xch", "neut", "and"};
  for (const auto& nm : names) {
    rep.columns.push_back(nm + "_num");
    rep.columns.push_back(nm + "_den");
    rep.columns.push_back(nm);
  }
  for (int k = 1; k <= cfg.k_max; ++k) {
    std::vector<double> row{static_cast<double>(k)};
    for (const Scheme s : schemes) {
      const Rational r = dof_formula(s, k);
      row.push_back(static_cast<double>(r.numerator()));
      row.push_back(static_cast<double>(r.denominator()));
      row.push_back(boost::rational_cast<double>(r));
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

Report run_diagonalize(const ExperimentConfig& cfg) {
  Report rep;
  rep.mode = mode_name(cfg.mode);
  rep.columns = {"trial",       "seed",          "erased",
                 "cause",       "max_offdiag",   "max_diag_err",
                 "bad_h_count"};
  const TvScheme inst =
      calibrate(cfg.k, cfg.n, cfg.epsilon, cfg.dist, cfg.calib_trials,
                cfg.seed, cfg.p_grid.front(), cfg.sigma2);
  const int d = static_cast<int>(inst.block_len);

  std::vector<std::vector<double>> rows(cfg.trials);
  parallel_for(cfg.trials, cfg.jobs, [&](int t) {
    const std::uint64_t trial_seed =
        derive_seed(cfg.seed, 0x10, static_cast<std::uint64_t>(t));
    const ChannelRealization real =
        sample_time_varying(cfg.k, 2 * d, cfg.dist, trial_seed);
    int bad = 0;
    const auto second = real.block_matrices(Hop::second, 1, d);
    for (const auto& h : second)
      if (!(std::abs(h.determinant()) > inst.h_det_min)) ++bad;
    const EndToEndMap e2e =
        end_to_end_map(inst, real.block_matrices(Hop::first, 0, d), second);
    rows[t] = {static_cast<double>(t),
               static_cast<double>(trial_seed & ((1ULL << 53) - 1)),
               e2e.erased ? 1.0 : 0.0,
               cause_code(e2e.cause),
               e2e.max_off_diagonal,
               e2e.max_diagonal_error,
               static_cast<double>(bad)};
  });
  rep.rows = std::move(rows);

  double worst_off = 0.0, worst_diag = 0.0;
  int erased = 0;
  for (const auto& r : rep.rows) {
    if (r[2] > 0.5) {
      ++erased;
      continue;
    }
    worst_off = std::max(worst_off, r[4]);
    worst_diag = std::max(worst_diag, r[5]);
  }
  rep.aggregates["erased"] = erased;
  rep.aggregates["max_offdiag"] = worst_off;
  rep.aggregates["max_diag_err"] = worst_diag;
  rep.aggregates["gamma_src"] = inst.gamma_src;
  rep.aggregates["gamma_relay"] = inst.gamma_relay;
  return rep;
}

Report run_simulate_tv(const ExperimentConfig& cfg) {
  Report rep;
  rep.mode = mode_name(cfg.mode);
  rep.columns = {"block",        "seed",          "erased",
                 "cause",        "num_erasure",   "mse",
                 "sum_rate_bits_per_step", "log_abs_det_t", "log_abs_det_ttilde",
                 "bad_h_count",  "solve_residual"};
  const TvScheme inst =
      calibrate(cfg.k, cfg.n, cfg.epsilon, cfg.dist, cfg.calib_trials,
                cfg.seed, cfg.p_grid.front(), cfg.sigma2);
  const int d = static_cast<int>(inst.block_len);
  const ChannelRealization real = sample_time_varying(
      cfg.k, (cfg.blocks + 1) * d, cfg.dist, derive_seed(cfg.seed, 0x11));
  const TvSimReport sim = simulate_blocks(inst, real, cfg.blocks, cfg.seed);
  for (const auto& b : sim.blocks) {
    rep.rows.push_back({static_cast<double>(b.block),
                        static_cast<double>(b.seed), b.erased ? 1.0 : 0.0,
                        cause_code(b.cause), b.numerical_erasure ? 1.0 : 0.0,
                        b.mse, b.sum_rate, b.log_abs_det_t,
                        b.log_abs_det_ttilde,
                        static_cast<double>(b.bad_h_count),
                        b.solve_residual});
  }
  rep.aggregates["erasure_freq"] = sim.erasure_freq;
  rep.aggregates["numerical_erasures"] = sim.numerical_erasures;
  rep.aggregates["mean_mse"] = sim.mean_mse;
  rep.aggregates["mean_sum_rate"] = sim.mean_sum_rate;
  rep.aggregates["max_solve_residual"] = sim.max_solve_residual;
  rep.aggregates["erasure_budget_3eps"] = 3.0 * cfg.epsilon;
  return rep;
}

Report run_dof_sweep(const ExperimentConfig& cfg) {
  Report rep;
  rep.mode = mode_name(cfg.mode);
  rep.columns = {"p", "half_log2_p", "mean_sum_rate_bits_per_step",
                 "blocks", "erased"};
  const TvScheme inst =
      calibrate(cfg.k, cfg.n, cfg.epsilon, cfg.dist, cfg.calib_trials,
                cfg.seed, 1.0, cfg.sigma2);
  const int d = static_cast<int>(inst.block_len);

  // Effective noise variances are P-free; one set of blocks covers the grid.
  std::vector<Eigen::MatrixXd> vars(cfg.trials);
  std::vector<char> ok(cfg.trials, 0);
  parallel_for(cfg.trials, cfg.jobs, [&](int t) {
    const ChannelRealization real = sample_time_varying(
        cfg.k, 2 * d, cfg.dist,
        derive_seed(cfg.seed, 0x12, static_cast<std::uint64_t>(t)));
    const StreamNoise sn =
        effective_noise(inst, real.block_matrices(Hop::first, 0, d),
                        real.block_matrices(Hop::second, 1, d));
    if (!sn.erased) {
      vars[t] = sn.variances;
      ok[t] = 1;
    }
  });

  std::vector<std::pair<double, double>> samples;
  int erased = 0;
  for (int t = 0; t < cfg.trials; ++t)
    if (!ok[t]) ++erased;
  for (double p : cfg.p_grid) {
    double acc = 0.0;
    int cnt = 0;
    for (int t = 0; t < cfg.trials; ++t) {
      if (!ok[t]) continue;
      TvScheme at_p = inst;
      at_p.power = p;
      acc += pair_rates(at_p, vars[t], p).sum();
      ++cnt;
    }
    const double mean = cnt ? acc / cnt : 0.0;
    samples.emplace_back(p, mean);
    rep.rows.push_back({p, 0.5 * std::log2(p), mean,
                        static_cast<double>(cnt),
                        static_cast<double>(erased)});
  }
  const SlopeEstimate est = estimate_dof_slope(samples);
  rep.aggregates["slope"] = est.slope;
  rep.aggregates["slope_half_width"] = est.half_width;
  rep.aggregates["erased_frac"] =
      static_cast<double>(erased) / std::max(1, cfg.trials);
  const Rational target =
      Rational(cfg.k) *
      tv_pair_dof(cfg.k, cfg.n,
                  Rational(static_cast<long long>(cfg.epsilon * 1000000), 1000000));
  rep.aggregates["formula_sum_dof"] = boost::rational_cast<double>(target);
  return rep;
}

Report run_simulate_const(const ExperimentConfig& cfg) {
  Report rep;
  rep.mode = mode_name(cfg.mode);
  rep.columns = {"p",         "q",           "trials",       "relay_ser",
                 "dest_ser",  "e2e_ser",     "relay_min_dist",
                 "dest_min_dist"};
  const ConstSweepReport sweep =
      symbol_error_sweep(cfg.k, cfg.n, cfg.epsilon, cfg.sigma2, cfg.dist,
                         cfg.p_grid, cfg.trials, cfg.seed, cfg.enum_budget);
  for (const auto& pt : sweep.points) {
    rep.rows.push_back({pt.power, static_cast<double>(pt.q),
                        static_cast<double>(pt.trials), pt.relay_ser,
                        pt.dest_ser, pt.e2e_ser, pt.relay_min_dist,
                        pt.dest_min_dist});
  }
  rep.aggregates["channel_rejections"] = sweep.channel_rejections;
  rep.aggregates["monotone_within_bands"] =
      sweep.monotone_within_bands ? 1.0 : 0.0;
  rep.aggregates["channel_seed"] =
      static_cast<double>(sweep.channel_seed & ((1ULL << 53) - 1));
  return rep;
}

Report run_mimo_region(const ExperimentConfig& cfg) {
  Report rep;
  rep.mode = mode_name(cfg.mode);
  const int k = cfg.mimo.k;
  for (int i = 0; i < k; ++i) rep.columns.push_back("d" + std::to_string(i));
  rep.columns.push_back("contained");
  rep.columns.push_back("violations");

  Rng rng(derive_seed(cfg.seed, 0x13));
  int contained = 0;
  for (int t = 0; t < cfg.trials; ++t) {
    std::vector<double> d(k);
    for (int i = 0; i < k; ++i) {
      const double cap = std::min(cfg.mimo.m_src[i], cfg.mimo.m_dst[i]);
      d[i] = rng.uniform(0.0, 1.25 * cap);
      if (rng.uniform01() < 0.15) d[i] = cap;  // per-pair boundary
    }
    if (rng.uniform01() < 0.15) {  // sum boundary
      double sum = 0.0;
      for (double v : d) sum += v;
      if (sum > 0.0) {
        const double scale = cfg.mimo.relay_antennas() / sum;
        for (double& v : d) v *= scale;
      }
    }
    const RegionCheck chk = mimo_region_contains(cfg.mimo, d);
    if (chk.contained) ++contained;
    std::vector<double> row = d;
    row.push_back(chk.contained ? 1.0 : 0.0);
    row.push_back(static_cast<double>(chk.violations.size()));
    rep.rows.push_back(std::move(row));
  }
  rep.aggregates["contained_frac"] =
      static_cast<double>(contained) / std::max(1, cfg.trials);
  return rep;
}

Report run_multihop(const ExperimentConfig& cfg) {
  Report rep;
  rep.mode = mode_name(cfg.mode);
  rep.columns = {"k", "middle_layers", "min_middle", "dof"};
  int min_mid = cfg.k;
  for (int a : cfg.layers) min_mid = std::min(min_mid, a);
  rep.rows.push_back({static_cast<double>(cfg.k),
                      static_cast<double>(cfg.layers.size()),
                      static_cast<double>(min_mid),
                      static_cast<double>(multihop_dof(cfg.k, cfg.layers))});
  return rep;
}

}  // namespace

Report run(const ExperimentConfig& cfg) {
  auto diags = validate(cfg);
  if (!diags.empty()) throw ValidationError(std::move(diags));
  switch (cfg.mode) {
    case Mode::baselines: return run_baselines(cfg);
    case Mode::diagonalize: return run_diagonalize(cfg);
    case Mode::simulate_tv: return run_simulate_tv(cfg);
    case Mode::dof_sweep: return run_dof_sweep(cfg);
    case Mode::simulate_const: return run_simulate_const(cfg);
    case Mode::mimo_region: return run_mimo_region(cfg);
    case Mode::multihop: return run_multihop(cfg);
  }
  throw std::logic_error("unreachable");
}

namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // trim to the shortest representation that still round-trips
  for (int prec = 1; prec < 17; ++prec) {
    char probe[40];
    std::snprintf(probe, sizeof probe, "%.*g", prec, v);
    if (std::strtod(probe, nullptr) == v) return probe;
  }
  return buf;
}

}  // namespace

void write_csv(const Report& report, std::ostream& os) {
  for (std::size_t c = 0; c < report.columns.size(); ++c) {
    os << (c ? "," : "") << report.columns[c];
  }
  os << "\n";
  for (const auto& row : report.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      os << (c ? "," : "") << format_value(row[c]);
    }
    os << "\n";
  }
  for (const auto& [name, value] : report.aggregates) {
    os << "# aggregate," << name << "," << format_value(value) << "\n";
  }
}

json report_to_json(const Report& report, const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = 1;
  j["mode"] = report.mode;

  j["columns"] = report.columns;
  j["rows"] = report.rows;
  j["aggregates"] = report.aggregates;
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%FT%TZ", std::gmtime(&now));
  j["provenance"] = {{"version", kVersion},
                     {"wall_clock_utc", stamp},
                     {"config", config_to_json(cfg)}};
  return j;
}

void write_report(const Report& report, const ExperimentConfig& cfg) {
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!cfg.out_path.empty()) {
    file.open(cfg.out_path);
    if (!file) throw IoError("cannot open output file: " + cfg.out_path);
    os = &file;
  }
  if (cfg.format == "json") {
    *os << report_to_json(report, cfg).dump(2) << "\n";
  } else {
    write_csv(report, *os);
  }
  os->flush();
  if (!*os) throw IoError("failed writing report");
}

}  // namespace netdiag
