#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "netdiag/channel.hpp"
#include "netdiag/directions.hpp"

namespace netdiag {

inline constexpr double kDefaultEnumBudget = 1e8;

// Constant-channel instance. Integer symbols ride on rationally
// independent real directions; all scalings are powers of P:
//   Q      = floor(P^((1-eps) / (2(d+eps))))        symbol bound
//   gamma  = beta  * P^((d-1+2 eps) / (2(d+eps)))   source scaling
//   gamma' = beta' * P^((d-1+2 eps) / (2(d+eps)))   relay scaling
// beta = 1 / sum_s |T_s| and beta' = 1 / (K sum_s |Ttilde_s|) make the
// worst-case transmit amplitude exactly sqrt(P).
struct ConstScheme {
  int k = 1;
  int n = 1;
  std::size_t num_streams = 1;  // L
  std::size_t block_len = 2;    // d
  double epsilon = 0.1;
  double power = 100.0;
  double noise_var = 1.0;

  long q = 1;
  double beta = 1.0;
  double beta_relay = 1.0;
  double p_scale = 1.0;  // P^((d-1+2 eps)/(2(d+eps))); gamma = beta * p_scale
  double gamma_src = 1.0;
  double gamma_relay = 1.0;

  Eigen::MatrixXd h1;       // first hop (j,i)
  Eigen::MatrixXd h2;       // second hop (j,i)
  Eigen::MatrixXd b;        // h2^{-1}; entry (j,i) is b_ij
  Eigen::VectorXd t_src;    // T_s over Delta_N (first hop)
  Eigen::VectorXd t_recv;   // T_s over Delta_{N+1} (first hop, relay side)
  Eigen::VectorXd t_relay;  // Ttilde_s over Delta_{N+1} (re-encode)
  Eigen::VectorXd t_dest;   // Ttilde_s over Delta_N
  DirectionSet dn = DirectionSet::delta(1, 1);
  DirectionSet dn1 = DirectionSet::delta(1, 2);
};

ConstScheme make_instance(int k, int n, double epsilon, double power,
                          double noise_var, const ChannelRealization& draw);

// Directions of Delta_{N+1} a relay can actually receive: every shift of a
// Delta_N member at its own receiver index.
struct SupportSet {
  int relay_j = 0;
  std::vector<std::size_t> members;  // sorted indices into Delta_{N+1}
};
SupportSet support_set(const ConstScheme& inst, int relay_j);

// X_i = gamma * sum_s T_s c(i,s); symbols must lie in [-Q, Q].
Eigen::VectorXd encode_sources_const(const ConstScheme& inst,
                                     const MatrixXl& c);

// Exhaustive nearest-point decode over integer tuples on the support with
// per-coefficient bound K*Q. Ties resolve to the lexicographically smaller
// tuple. Returns a full length-d vector (zeros off the support).
VectorXl relay_decode_nearest(const ConstScheme& inst, double y,
                              const SupportSet& support,
                              double budget = kDefaultEnumBudget);

// Exact minimum of |scale * sum_a dirs[a] du_a| over nonzero integer
// difference tuples with |du_a| <= 2*bound. The independent brute-force
// oracle backing every decode guarantee.
double min_distance_oracle(const Eigen::VectorXd& dirs, long bound,
                           double scale, double budget = kDefaultEnumBudget);

// X_j = gamma' * sum_s Ttilde_s u(j,s).
Eigen::VectorXd relay_reencode(const ConstScheme& inst, const MatrixXl& u);

// Nearest point of the destination constellation; tuple over Delta_N with
// entries in [-Q, Q].
VectorXl destination_decode_nearest(const ConstScheme& inst, double y,
                                    double budget = kDefaultEnumBudget);

// Smallest constellation spacing across relays and destination; the draw
// acceptance rule rejects channels below 1e-9 * scale.
struct MinDistances {
  double relay = 0.0;  // min over relays
  double dest = 0.0;
};
MinDistances min_distances(const ConstScheme& inst,
                           double budget = kDefaultEnumBudget);
bool draw_acceptable(const ConstScheme& inst,
                     double budget = kDefaultEnumBudget);

struct ConstSweepPoint {
  double power = 0.0;
  long q = 0;
  int trials = 0;
  double relay_ser = 0.0;  // relay-stage symbol error rate
  double dest_ser = 0.0;   // destination stage, relay errors replaced by truth
  double e2e_ser = 0.0;    // end-to-end symbol error rate
  double relay_min_dist = 0.0;
  double dest_min_dist = 0.0;
};

struct ConstSweepReport {
  std::vector<ConstSweepPoint> points;
  int channel_rejections = 0;  // draws resampled by the min-distance rule
  std::uint64_t channel_seed = 0;
  bool monotone_within_bands = true;  // e2e SER vs P, 95% binomial bands
};

// One accepted constant channel; per grid power, fresh symbols and noise
// every trial. The channel is reused across the grid so the decay in P is
// observable per draw.
ConstSweepReport symbol_error_sweep(int k, int n, double epsilon,
                                    double noise_var,
                                    const GainDistribution& dist,
                                    const std::vector<double>& p_grid,
                                    int trials, std::uint64_t seed,
                                    double budget = kDefaultEnumBudget);

}  // namespace netdiag
