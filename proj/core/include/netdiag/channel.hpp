#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "netdiag/rng.hpp"

namespace netdiag {

enum class GainKind { standard_normal, uniform_interval };

// Continuous gain distribution with finite second moment.
struct GainDistribution {
  GainKind kind = GainKind::uniform_interval;
  double lo = -2.0;
  double hi = 2.0;

  static GainDistribution standard_normal() {
    return {GainKind::standard_normal, 0.0, 0.0};
  }
  static GainDistribution uniform(double lo, double hi);

  double sample(Rng& rng) const;
  double variance() const;
  double mean() const;
  std::string describe() const;
};

// Default for all experiments. Sign-symmetric gains keep the monomial
// direction matrices well conditioned; see README notes on distributions.
inline GainDistribution default_gain_distribution() {
  return GainDistribution::uniform(-2.0, 2.0);
}

enum class Hop { first, second };

// Per-time-step gain matrices for both hops of a two-hop K x K x K network.
// Entry (t, j, i) of a hop is the gain from transmitter i to receiver j at
// time t. Immutable after construction; safe to share across threads.
class ChannelRealization {
 public:
  ChannelRealization(int k, int t_total, bool constant, std::uint64_t seed,
                     GainDistribution dist, std::vector<double> first,
                     std::vector<double> second);

  int k() const { return k_; }
  int t_total() const { return t_total_; }
  bool constant() const { return constant_; }
  std::uint64_t seed() const { return seed_; }
  const GainDistribution& dist() const { return dist_; }

  double gain(Hop hop, int t, int rx_j, int tx_i) const;

  // K x K matrix with (j,i) = gain from transmitter i to receiver j at t.
  Eigen::MatrixXd hop_matrix(Hop hop, int t) const;

  // Gain matrices for the d time steps of block m (times m*d .. (m+1)*d-1).
  std::vector<Eigen::MatrixXd> block_matrices(Hop hop, int block,
                                              int block_len) const;

  const std::vector<double>& raw(Hop hop) const {
    return hop == Hop::first ? first_ : second_;
  }

 private:
  int k_;
  int t_total_;
  bool constant_;
  std::uint64_t seed_;
  GainDistribution dist_;
  std::vector<double> first_;   // [t][j][i]
  std::vector<double> second_;  // [t][j][i]
};

ChannelRealization sample_time_varying(int k, int t_total,
                                       const GainDistribution& dist,
                                       std::uint64_t seed);

// One draw per (hop, i, j), replicated across t_total time steps.
ChannelRealization sample_constant(int k, const GainDistribution& dist,
                                   std::uint64_t seed, int t_total = 1);

nlohmann::json realization_to_json(const ChannelRealization& real);
ChannelRealization realization_from_json(const nlohmann::json& j);

}  // namespace netdiag
