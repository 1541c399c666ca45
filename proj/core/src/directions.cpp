#include "netdiag/directions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "netdiag/errors.hpp"
#include "netdiag/linalg.hpp"

namespace netdiag {

DirectionSet DirectionSet::delta(int k, int order, std::size_t cap) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (order < 1) throw std::invalid_argument("order must be >= 1");
  const int m = k * k;
  double approx = std::pow(static_cast<double>(order), m);
  if (approx > static_cast<double>(cap)) {
    throw BudgetExceeded("direction set size " + std::to_string(approx) +
                         " exceeds cap " + std::to_string(cap));
  }
  const std::size_t count = static_cast<std::size_t>(std::llround(approx));
  std::vector<ExponentVector> members;
  members.reserve(count);
  ExponentVector cur(m, 0);
  members.push_back(cur);
  // lexicographic successor: increment the last digit, carrying left
  for (std::size_t idx = 1; idx < count; ++idx) {
    int p = m - 1;
    while (cur[p] == order - 1) {
      cur[p] = 0;
      --p;
    }
    ++cur[p];
    members.push_back(cur);
  }
  return DirectionSet(k, order, std::move(members));
}

std::optional<std::size_t> DirectionSet::index_of(
    const ExponentVector& s) const {
  if (s.size() != static_cast<std::size_t>(k_ * k_)) return std::nullopt;
  std::size_t idx = 0;
  for (int e : s) {
    if (e < 0 || e >= order_) return std::nullopt;
    idx = idx * order_ + static_cast<std::size_t>(e);
  }
  return idx;
}

double eval_direction(const ExponentVector& s, const Eigen::MatrixXd& gains) {
  const int k = static_cast<int>(gains.rows());
  if (s.size() != static_cast<std::size_t>(k) * k ||
      gains.cols() != gains.rows()) {
    throw std::invalid_argument("exponent/gain dimension mismatch");
  }
  long total_degree = 0;
  double max_abs = 0.0;
  for (int p = 0; p < k * k; ++p) {
    if (s[p] > 0) {
      total_degree += s[p];
      max_abs = std::max(max_abs, std::abs(gains(p % k, p / k)));
    }
  }
  if (max_abs > 10.0 || total_degree > 64) {
    // log-domain accumulation; a zero base with positive exponent is 0
    double lg = 0.0;
    int sign = 1;
    for (int p = 0; p < k * k; ++p) {
      const int e = s[p];
      if (e == 0) continue;
      const double g = gains(p % k, p / k);
      if (g == 0.0) return 0.0;
      if (g < 0.0 && (e & 1)) sign = -sign;
      lg += e * std::log(std::abs(g));
    }
    return sign * std::exp(lg);
  }
  double v = 1.0;
  for (int p = 0; p < k * k; ++p) {
    const double g = gains(p % k, p / k);
    for (int e = 0; e < s[p]; ++e) v *= g;
  }
  return v;
}

double eval_tilde_direction(const ExponentVector& s, const Eigen::MatrixXd& b) {
  return eval_direction(s, b);
}

ExponentVector shift(const ExponentVector& s, int tx_i, int rx_j, int k) {
  if (tx_i < 0 || tx_i >= k || rx_j < 0 || rx_j >= k ||
      s.size() != static_cast<std::size_t>(k) * k) {
    throw std::invalid_argument("shift index out of range");
  }
  ExponentVector out = s;
  ++out[tx_i * k + rx_j];
  return out;
}

Eigen::VectorXd evaluate_all(const DirectionSet& set,
                             const Eigen::MatrixXd& gains) {
  const int k = set.k();
  const int order = set.order();
  if (gains.rows() != k || gains.cols() != k) {
    throw std::invalid_argument("gain matrix dimension mismatch");
  }
  const std::size_t count = set.size();
  Eigen::VectorXd v(count);
  v[0] = 1.0;
  if (count == 1) return v;
  const int m = k * k;
  // gains flattened in digit-weight order: weight w belongs to position
  // p = m-1-w
  std::vector<double> g(m);
  for (int p = 0; p < m; ++p) g[m - 1 - p] = gains(p % k, p / k);
  std::vector<std::size_t> pow_order(m + 1);
  pow_order[0] = 1;
  for (int w = 1; w <= m; ++w) pow_order[w] = pow_order[w - 1] * order;
  for (std::size_t idx = 1; idx < count; ++idx) {
    std::size_t q = idx;
    int w = 0;
    while (q % order == 0) {
      q /= order;
      ++w;
    }
    v[idx] = v[idx - pow_order[w]] * g[w];
  }
  return v;
}

Eigen::VectorXd compute_u(const Eigen::MatrixXd& c, int relay_j,
                          const DirectionSet& delta_n,
                          const DirectionSet& delta_n1) {
  const int k = delta_n1.k();
  if (c.rows() != k || c.cols() != static_cast<Eigen::Index>(delta_n.size()) ||
      relay_j < 0 || relay_j >= k) {
    throw std::invalid_argument("compute_u dimension mismatch");
  }
  Eigen::VectorXd u = Eigen::VectorXd::Zero(delta_n1.size());
  ExponentVector sm;
  for (std::size_t m = 0; m < delta_n1.size(); ++m) {
    const ExponentVector& s = delta_n1.member(m);
    double acc = 0.0;
    for (int i = 0; i < k; ++i) {
      const int p = i * k + relay_j;
      if (s[p] < 1) continue;
      sm = s;
      --sm[p];
      if (auto idx = delta_n.index_of(sm)) acc += c(i, *idx);
    }
    u[m] = acc;
  }
  return u;
}

VectorXl compute_u_int(const MatrixXl& c, int relay_j,
                       const DirectionSet& delta_n,
                       const DirectionSet& delta_n1) {
  const int k = delta_n1.k();
  if (c.rows() != k || c.cols() != static_cast<Eigen::Index>(delta_n.size()) ||
      relay_j < 0 || relay_j >= k) {
    throw std::invalid_argument("compute_u dimension mismatch");
  }
  VectorXl u = VectorXl::Zero(delta_n1.size());
  ExponentVector sm;
  for (std::size_t m = 0; m < delta_n1.size(); ++m) {
    const ExponentVector& s = delta_n1.member(m);
    long acc = 0;
    for (int i = 0; i < k; ++i) {
      const int p = i * k + relay_j;
      if (s[p] < 1) continue;
      sm = s;
      --sm[p];
      if (auto idx = delta_n.index_of(sm)) acc += c(i, *idx);
    }
    u[m] = acc;
  }
  return u;
}

Eigen::MatrixXd build_direction_matrix(
    const DirectionSet& set, const std::vector<Eigen::MatrixXd>& gain_rows) {
  if (gain_rows.empty()) throw std::invalid_argument("no gain rows");
  Eigen::MatrixXd m(gain_rows.size(), set.size());
  for (std::size_t r = 0; r < gain_rows.size(); ++r) {
    m.row(r) = evaluate_all(set, gain_rows[r]).transpose();
  }
  return m;
}

DetCheck relative_det_check(const Eigen::MatrixXd& m) {
  DetCheck out;
  out.log_abs_det = log_abs_det(m);
  double scale = 0.0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double nrm = m.col(c).norm();
    if (nrm == 0.0) {
      scale = -std::numeric_limits<double>::infinity();
      break;
    }
    scale += std::log(nrm);
  }
  out.log_scale = scale;
  out.singular = !(out.log_abs_det - out.log_scale > std::log(1e-12));
  return out;
}

namespace {

void fold_check(IndependenceReport& rep, const DetCheck& chk) {
  const double rel = chk.log_abs_det - chk.log_scale;
  if (rep.trials == 1 || chk.log_abs_det < rep.min_log_abs_det)
    rep.min_log_abs_det = chk.log_abs_det;
  if (rep.trials == 1 || rel < rep.min_log_rel_det) rep.min_log_rel_det = rel;
  if (chk.singular) ++rep.failures;
  rep.min_abs_det =
      rep.min_log_abs_det > 700.0 ? std::numeric_limits<double>::max()
                                  : std::exp(rep.min_log_abs_det);
}

}  // namespace

IndependenceReport check_monomial_independence(int k, const DirectionSet& set,
                                               int trials, std::uint64_t seed,
                                               const GainDistribution& dist) {
  IndependenceReport rep;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, 0xd1, static_cast<std::uint64_t>(t)));
    std::vector<Eigen::MatrixXd> rows;
    rows.reserve(set.size());
    for (std::size_t r = 0; r < set.size(); ++r) {
      Eigen::MatrixXd g(k, k);
      for (int j = 0; j < k; ++j)
        for (int i = 0; i < k; ++i) g(j, i) = dist.sample(rng);
      rows.push_back(std::move(g));
    }
    ++rep.trials;
    fold_check(rep, relative_det_check(build_direction_matrix(set, rows)));
  }
  return rep;
}

IndependenceReport check_tilde_independence(int k, const DirectionSet& set,
                                            int trials, std::uint64_t seed,
                                            const GainDistribution& dist,
                                            double min_abs_det_h) {
  IndependenceReport rep;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, 0xd2, static_cast<std::uint64_t>(t)));
    std::vector<Eigen::MatrixXd> rows;
    rows.reserve(set.size());
    for (std::size_t r = 0; r < set.size(); ++r) {
      Eigen::MatrixXd h(k, k);
      int attempts = 0;
      do {
        if (++attempts > 100000) {
          throw std::runtime_error(
              "could not draw a second-hop matrix above the det floor");
        }
        for (int j = 0; j < k; ++j)
          for (int i = 0; i < k; ++i) h(j, i) = dist.sample(rng);
      } while (!(std::abs(h.determinant()) > min_abs_det_h));
      rows.push_back(h.inverse());
    }
    ++rep.trials;
    fold_check(rep, relative_det_check(build_direction_matrix(set, rows)));
  }
  return rep;
}

}  // namespace netdiag
