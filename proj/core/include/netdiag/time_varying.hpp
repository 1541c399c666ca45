#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "netdiag/channel.hpp"
#include "netdiag/directions.hpp"

namespace netdiag {

// Calibrated instance of the time-varying scheme. Thresholds are empirical
// Monte Carlo quantiles; determinant thresholds are stored as natural logs
// of the magnitude since |det T| spans hundreds of orders at block length
// (N+1)^(K^2).
struct TvScheme {
  int k = 1;
  int n = 1;
  std::size_t num_streams = 1;  // L = N^(K^2)
  std::size_t block_len = 2;    // d = (N+1)^(K^2)
  double epsilon = 0.05;
  double power = 1.0;      // P
  double noise_var = 0.0;  // sigma^2 per hop

  double gamma_src = 1.0;    // source scaling; gamma^2 sum_s E[T_s^2] <= 0.9
  double gamma_relay = 1.0;  // relay scaling; gamma'^2 K sum E[Ttilde_s^2] <= 0.9

  double log_det_min_t = 0.0;       // relays silent below this (log|det T|)
  double h_det_min = 0.0;           // per-time rule on |det H_{V,D}[t]|
  double log_det_min_ttilde = 0.0;  // destination rule on log|det Ttilde|

  // Relay-side additive noise power per unit sigma^2 (P-independent).
  // The transmit power constraint is met once
  //   0.9 P + relay_noise_unit * sigma^2 <= P.
  double relay_noise_unit = 0.0;
  double power_floor = 0.0;  // smallest P honoring the constraint above

  GainDistribution dist;
  int calibration_trials = 0;
};

// Monte Carlo calibration of all thresholds and scalings.
//   delta   : epsilon-quantile of |det T| (relays stay silent below it)
//   delta'  : chosen so that a block has at least L per-time-good steps
//             except with probability < epsilon (binomial model)
//   delta'' : epsilon-quantile of |det Ttilde| over delta'-conditioned rows
// Quantiles are shrunk by 0.999 so degenerate one-point distributions
// (L = 1 makes |det Ttilde| identically 1) still satisfy the strict
// threshold comparisons.
TvScheme calibrate(int k, int n, double epsilon, const GainDistribution& dist,
                   int trials, std::uint64_t seed, double power = 1.0,
                   double noise_var = 0.0);

// X(i, t) = gamma_src * sum_s T_s[t] c(i, s); one column per time step.
Eigen::MatrixXd encode_sources(const TvScheme& inst, const Eigen::MatrixXd& c,
                               const std::vector<Eigen::MatrixXd>& first_hop);

struct RelayOutput {
  Eigen::MatrixXd x;           // K x d relay transmit signals (next block)
  std::vector<bool> active_t;  // per-time |det H| rule; false => silent
  bool t_ok = false;           // |det T| rule; false => whole block silent
  double log_abs_det_t = 0.0;
  double solve_residual = 0.0;
  Eigen::MatrixXd u_hat;  // K x d estimates (row per relay)
};

// Estimate-and-redirect at every relay: solve T u = y, re-modulate the
// estimates on the Ttilde directions of the next block's time steps.
RelayOutput relay_process(const TvScheme& inst, const Eigen::MatrixXd& received,
                          const std::vector<Eigen::MatrixXd>& first_hop,
                          const std::vector<Eigen::MatrixXd>& second_hop_next);

enum class ErasureCause {
  none,
  relay_silent,        // |det T| <= delta
  not_enough_good_t,   // fewer than L times with |det H| > delta'
  ttilde_singular,     // |det Ttilde| <= delta''
};

struct BlockOutcome {
  bool erased = true;
  ErasureCause cause = ErasureCause::none;
  Eigen::MatrixXd c_hat;  // K x L (row per destination), empty when erased
  double log_abs_det_t = 0.0;
  double log_abs_det_ttilde = 0.0;
  int bad_h_count = 0;    // time steps with |det H| <= delta'
  double solve_residual = 0.0;
  bool numerical_erasure = false;  // solve residual above 1e-6
};

BlockOutcome destination_decode(const TvScheme& inst,
                                const Eigen::MatrixXd& received,
                                const std::vector<Eigen::MatrixXd>& second_hop,
                                const std::vector<bool>& relay_active_t,
                                bool relay_t_ok, double relay_log_abs_det_t);

struct EndToEndMap {
  bool erased = true;
  ErasureCause cause = ErasureCause::none;
  Eigen::MatrixXd map;  // KL x KL, stacked per source / destination
  double max_off_diagonal = 0.0;
  double max_diagonal_error = 0.0;
};

// Noiseless composition encode -> hop 1 -> relays -> hop 2 -> decode,
// applied to the KL symbol basis vectors. Diagonalization holds when this
// is the identity.
EndToEndMap end_to_end_map(const TvScheme& inst,
                           const std::vector<Eigen::MatrixXd>& first_hop,
                           const std::vector<Eigen::MatrixXd>& second_hop);

struct StreamNoise {
  bool erased = true;
  ErasureCause cause = ErasureCause::none;
  Eigen::MatrixXd variances;  // K x L effective noise variances (P-free)
  double log_abs_det_t = 0.0;
  double log_abs_det_ttilde = 0.0;
  int bad_h_count = 0;
};

// Exact per-block covariance of the end-to-end additive noise, propagated
// through relay inversion, redirection and destination inversion.
StreamNoise effective_noise(const TvScheme& inst,
                            const std::vector<Eigen::MatrixXd>& first_hop,
                            const std::vector<Eigen::MatrixXd>& second_hop);

// (1 - 3 epsilon) / d * sum_s (1/2) log2(1 + P / var_s), per pair.
Eigen::VectorXd pair_rates(const TvScheme& inst,
                           const Eigen::MatrixXd& variances, double power);

struct TvBlockRecord {
  int block = 0;
  std::uint64_t seed = 0;
  bool erased = true;
  ErasureCause cause = ErasureCause::none;
  bool numerical_erasure = false;
  double mse = 0.0;       // mean squared symbol error over non-erased blocks
  double sum_rate = 0.0;  // bits per time step, all pairs
  double log_abs_det_t = 0.0;
  double log_abs_det_ttilde = 0.0;
  int bad_h_count = 0;
  double solve_residual = 0.0;
};

struct TvSimReport {
  std::vector<TvBlockRecord> blocks;
  int n_blocks = 0;
  int erased = 0;
  int numerical_erasures = 0;
  double erasure_freq = 0.0;
  double mean_mse = 0.0;       // over non-erased
  double mean_sum_rate = 0.0;  // over non-erased
  double max_solve_residual = 0.0;
};

// Pipelined block schedule: symbols of block m are forwarded by the relays
// during block m+1, so the realization must cover (n_blocks+1) * d steps.
TvSimReport simulate_blocks(const TvScheme& inst,
                            const ChannelRealization& real, int n_blocks,
                            std::uint64_t seed);

}  // namespace netdiag
