#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "netdiag/channel.hpp"

namespace netdiag {

// Exponent vector s = (s_00, ..., s_{K-1,K-1}), flattened at position
// p = tx_i * K + rx_j. All indices in this library are 0-based.
using ExponentVector = std::vector<int>;

using VectorXl = Eigen::Matrix<long, Eigen::Dynamic, 1>;
using MatrixXl = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr std::size_t kDefaultDirectionCap = 1'000'000;

// The set {0, ..., order-1}^(K^2) in lexicographic order (entry 0 most
// significant), so that member index equals the base-`order` value of the
// exponent digits.
class DirectionSet {
 public:
  static DirectionSet delta(int k, int order,
                            std::size_t cap = kDefaultDirectionCap);

  int k() const { return k_; }
  int order() const { return order_; }
  std::size_t size() const { return members_.size(); }
  const ExponentVector& member(std::size_t idx) const { return members_[idx]; }
  const std::vector<ExponentVector>& members() const { return members_; }

  // Inverse of member(); nullopt if any entry is outside [0, order).
  std::optional<std::size_t> index_of(const ExponentVector& s) const;

 private:
  DirectionSet(int k, int order, std::vector<ExponentVector> members)
      : k_(k), order_(order), members_(std::move(members)) {}
  int k_;
  int order_;
  std::vector<ExponentVector> members_;
};

// Monomial value prod_{i,j} gains(j,i)^{s_ij}; 0^0 == 1. Switches to
// log-domain accumulation when overflow is plausible (|gain| > 10 or
// total degree > 64).
double eval_direction(const ExponentVector& s, const Eigen::MatrixXd& gains);

// Identical monomial convention evaluated on the relay redirection basis:
// b(j,i) of the argument must hold b_ij, i.e. the (j,i) entry of
// H_{V,D}^{-1}. Passing that inverse matrix verbatim is correct.
double eval_tilde_direction(const ExponentVector& s, const Eigen::MatrixXd& b);

// s with the (tx_i, rx_j) exponent incremented.
ExponentVector shift(const ExponentVector& s, int tx_i, int rx_j, int k);

// All monomials of `set` at one gain matrix, in member order. Uses the
// lex-predecessor recurrence (one multiply per member); matches
// eval_direction's association order.
Eigen::VectorXd evaluate_all(const DirectionSet& set,
                             const Eigen::MatrixXd& gains);

// Aligned relay coefficients: u[s] = sum_i c(i, s - e_{i,j}) over s in
// delta_n1, with out-of-range exponent vectors contributing zero.
Eigen::VectorXd compute_u(const Eigen::MatrixXd& c, int relay_j,
                          const DirectionSet& delta_n,
                          const DirectionSet& delta_n1);
VectorXl compute_u_int(const MatrixXl& c, int relay_j,
                       const DirectionSet& delta_n,
                       const DirectionSet& delta_n1);

// Row r is evaluate_all(set, gain_rows[r]).
Eigen::MatrixXd build_direction_matrix(
    const DirectionSet& set, const std::vector<Eigen::MatrixXd>& gain_rows);

struct DetCheck {
  double log_abs_det;  // natural log of |det|; -inf when singular
  double log_scale;    // log of the product of column norms
  bool singular;       // |det| < 1e-12 * product of column norms
};
DetCheck relative_det_check(const Eigen::MatrixXd& m);

struct IndependenceReport {
  int trials = 0;
  int failures = 0;
  double min_log_abs_det = 0.0;
  double min_log_rel_det = 0.0;  // log(|det| / column-norm product)
  double min_abs_det = 0.0;      // exp(min_log_abs_det), clamped to finite
};

// Draws |set| gain matrices per trial and checks the resulting direction
// matrix against the relative singularity threshold.
IndependenceReport check_monomial_independence(
    int k, const DirectionSet& set, int trials, std::uint64_t seed,
    const GainDistribution& dist = default_gain_distribution());

// Same check with rows evaluated on independently drawn second-hop
// inverses. Rows are drawn conditioned on |det H| > min_abs_det_h,
// mirroring the scheme's per-time determinant rule; unconditioned draws
// have unbounded inverse entries.
IndependenceReport check_tilde_independence(
    int k, const DirectionSet& set, int trials, std::uint64_t seed,
    const GainDistribution& dist = default_gain_distribution(),
    double min_abs_det_h = 1.0);

}  // namespace netdiag
