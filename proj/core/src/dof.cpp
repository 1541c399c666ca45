#include "netdiag/dof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace netdiag {

namespace {

long long checked_ipow(long long base, int exp) {
  long long v = 1;
  for (int i = 0; i < exp; ++i) {
    if (v > std::numeric_limits<long long>::max() / base) {
      throw std::overflow_error("rational power overflow");
    }
    v *= base;
  }
  return v;
}

}  // namespace

Rational dof_formula(Scheme scheme, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  switch (scheme) {
    case Scheme::tdma:
      return Rational(1);
    case Scheme::interference_channel:
      return Rational(k, 2);
    case Scheme::x_channel:
      return Rational(static_cast<long long>(k) * k, 2LL * k - 1);
    case Scheme::neutralization: {
      long long best = 1;
      while ((best + 1) * best + 1 <= k) ++best;
      return Rational(best);
    }
    case Scheme::aligned_diag:
      return Rational(k);
  }
  throw std::invalid_argument("unknown scheme");
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "tdma") return Scheme::tdma;
  if (name == "interference-channel") return Scheme::interference_channel;
  if (name == "x-channel") return Scheme::x_channel;
  if (name == "neutralization") return Scheme::neutralization;
  if (name == "and" || name == "aligned-diagonalization")
    return Scheme::aligned_diag;
  throw std::invalid_argument("unknown scheme name: " + name);
}

std::string scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::tdma: return "tdma";
    case Scheme::interference_channel: return "interference-channel";
    case Scheme::x_channel: return "x-channel";
    case Scheme::neutralization: return "neutralization";
    case Scheme::aligned_diag: return "and";
  }
  return "?";
}

Rational tv_pair_dof(int k, int n, const Rational& epsilon) {
  const int m = k * k;
  const Rational ratio(checked_ipow(n, m), checked_ipow(n + 1, m));
  return (Rational(1) - Rational(3) * epsilon) * ratio;
}

Rational const_pair_dof(int k, int n, const Rational& epsilon) {
  const int m = k * k;
  const Rational num = (Rational(1) - epsilon) * Rational(checked_ipow(n, m));
  const Rational den = Rational(checked_ipow(n + 1, m)) + epsilon;
  return num / den;
}

SlopeEstimate estimate_dof_slope(
    const std::vector<std::pair<double, double>>& samples,
    double upper_fraction) {
  if (samples.size() < 4) {
    throw std::invalid_argument("slope estimation needs >= 4 grid points");
  }
  std::vector<std::pair<double, double>> s = samples;
  std::sort(s.begin(), s.end());
  if (!(std::log10(s.back().first / s.front().first) >= 4.0 - 1e-9)) {
    throw std::invalid_argument("grid must span at least 4 decades of P");
  }
  const std::size_t start =
      static_cast<std::size_t>((1.0 - upper_fraction) * s.size());
  const std::size_t m = s.size() - start;
  if (m < 2) throw std::invalid_argument("upper grid fraction too small");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = start; i < s.size(); ++i) {
    const double x = 0.5 * std::log2(s[i].first);
    const double y = s[i].second;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  SlopeEstimate est;
  est.points_used = static_cast<int>(m);
  est.slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - est.slope * sx) / m;
  if (m > 2) {
    double ss_res = 0.0;
    for (std::size_t i = start; i < s.size(); ++i) {
      const double x = 0.5 * std::log2(s[i].first);
      const double r = s[i].second - (intercept + est.slope * x);
      ss_res += r * r;
    }
    const double se =
        std::sqrt(ss_res / (m - 2) / (sxx - sx * sx / m));
    est.half_width = 2.0 * se;
  }
  return est;
}

int MimoProfile::relay_antennas() const {
  return std::accumulate(m_relay.begin(), m_relay.end(), 0);
}

RegionCheck mimo_region_contains(const MimoProfile& profile,
                                 const std::vector<double>& d) {
  if (profile.k < 1 ||
      profile.m_src.size() != static_cast<std::size_t>(profile.k) ||
      profile.m_dst.size() != static_cast<std::size_t>(profile.k) ||
      profile.m_relay.empty()) {
    throw std::invalid_argument("malformed MIMO profile");
  }
  if (d.size() != static_cast<std::size_t>(profile.k)) {
    throw std::invalid_argument("tuple length must equal k");
  }
  RegionCheck out;
  double sum = 0.0;
  for (int i = 0; i < profile.k; ++i) {
    if (d[i] < 0.0) {
      out.violations.push_back("d[" + std::to_string(i) + "] is negative");
      continue;
    }
    sum += d[i];
    const double cap = std::min(profile.m_src[i], profile.m_dst[i]);
    if (d[i] > cap) {
      out.violations.push_back("d[" + std::to_string(i) + "]=" +
                               std::to_string(d[i]) + " > min(M_S,M_D)=" +
                               std::to_string(cap));
    }
  }
  const double relays = profile.relay_antennas();
  if (sum > relays) {
    out.violations.push_back("sum(d)=" + std::to_string(sum) +
                             " > relay antennas=" + std::to_string(relays));
  }
  out.contained = out.violations.empty();
  return out;
}

MimoReduction mimo_reduction(const MimoProfile& profile,
                             const std::vector<int>& d) {
  std::vector<double> dd(d.begin(), d.end());
  const RegionCheck chk = mimo_region_contains(profile, dd);
  if (!chk.contained) {
    throw std::invalid_argument("tuple outside the degrees-of-freedom region");
  }
  MimoReduction out;
  out.src_kept = d;
  out.dst_kept = d;
  out.k_virtual = std::accumulate(d.begin(), d.end(), 0);
  out.relay_kept = profile.m_relay;
  int to_discard = profile.relay_antennas() - out.k_virtual;
  out.relay_discarded = to_discard;
  // highest-indexed relay antennas go first
  for (int r = static_cast<int>(out.relay_kept.size()) - 1;
       r >= 0 && to_discard > 0; --r) {
    const int take = std::min(out.relay_kept[r], to_discard);
    out.relay_kept[r] -= take;
    to_discard -= take;
  }
  return out;
}

int multihop_dof(int k, const std::vector<int>& middle_layers) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  int best = k;
  for (int a : middle_layers) {
    if (a < 1) throw std::invalid_argument("layer widths must be >= 1");
    best = std::min(best, a);
  }
  return best;
}

Eigen::VectorXd mimo_relay_diagonalization(const Eigen::MatrixXd& h1,
                                           const Eigen::MatrixXd& h2,
                                           const Eigen::VectorXd& x) {
  if (h1.rows() != h1.cols() || h2.rows() != h2.cols() ||
      h1.rows() != h2.rows() || x.size() != h1.rows()) {
    throw std::invalid_argument("dimension mismatch");
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu1(h1), lu2(h2);
  if (!lu1.isInvertible() || !lu2.isInvertible()) {
    throw std::invalid_argument("singular hop matrix");
  }
  const Eigen::VectorXd y_relay = h1 * x;
  const Eigen::VectorXd x_relay = lu2.solve(lu1.solve(y_relay));
  return h2 * x_relay;
}

}  // namespace netdiag
