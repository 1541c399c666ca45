#pragma once

#include <Eigen/Dense>
#include <boost/rational.hpp>
#include <string>
#include <vector>

namespace netdiag {

using Rational = boost::rational<long long>;

enum class Scheme {
  tdma,                  // 1
  interference_channel,  // K/2
  x_channel,             // K^2 / (2K - 1)
  neutralization,        // max{N : N(N-1)+1 <= K}
  aligned_diag,          // K
};

Rational dof_formula(Scheme scheme, int k);
Scheme scheme_from_name(const std::string& name);
std::string scheme_name(Scheme scheme);

// Per-pair degrees of freedom of the two scheme variants, as exact
// rationals (epsilon rational).
Rational tv_pair_dof(int k, int n, const Rational& epsilon);      // (1-3e)(N/(N+1))^(K^2)
Rational const_pair_dof(int k, int n, const Rational& epsilon);   // (1-e)N^(K^2)/((N+1)^(K^2)+e)

struct SlopeEstimate {
  double slope = 0.0;
  double half_width = 0.0;  // ~95% confidence half-width of the slope
  int points_used = 0;
};

// Least-squares slope of sum-rate against (1/2) log2 P over the upper part
// of the grid; the lower part carries the additive-constant transient.
SlopeEstimate estimate_dof_slope(
    const std::vector<std::pair<double, double>>& samples,
    double upper_fraction = 0.5);

struct MimoProfile {
  int k = 1;                 // source-destination pairs
  std::vector<int> m_src;    // antennas per source (size k)
  std::vector<int> m_dst;    // antennas per destination (size k)
  std::vector<int> m_relay;  // antennas per relay (size = relay count)
  int relay_antennas() const;
};

struct RegionCheck {
  bool contained = false;
  std::vector<std::string> violations;
};

// d in the region iff sum_i d_i <= total relay antennas and
// d_i <= min(M_Si, M_Di) for every i.
RegionCheck mimo_region_contains(const MimoProfile& profile,
                                 const std::vector<double>& d);

struct MimoReduction {
  int k_virtual = 0;               // = sum_i d_i; each layer has this many
  std::vector<int> src_kept;       // antennas kept per source (= d_i)
  std::vector<int> dst_kept;
  std::vector<int> relay_kept;     // per relay, highest-indexed discarded first
  int relay_discarded = 0;
};

// Antenna-discard plan that reduces an in-region integer tuple to a
// balanced K' x K' x K' single-antenna network.
MimoReduction mimo_reduction(const MimoProfile& profile,
                             const std::vector<int>& d);

// min over all layers, source and destination layers included.
int multihop_dof(int k, const std::vector<int>& middle_layers);

// Centralized MIMO-relay map: the relay applies H2^{-1} H1^{-1} to its
// received vector, so the noiseless end-to-end map is the identity.
Eigen::VectorXd mimo_relay_diagonalization(const Eigen::MatrixXd& h1,
                                           const Eigen::MatrixXd& h2,
                                           const Eigen::VectorXd& x);

}  // namespace netdiag
