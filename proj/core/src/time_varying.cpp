#include "netdiag/time_varying.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "netdiag/errors.hpp"
#include "netdiag/linalg.hpp"

namespace netdiag {

namespace {

constexpr double kNumericalErasureTol = 1e-6;

double binomial_cdf(int up_to, int n, double p) {
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return up_to >= n ? 1.0 : 0.0;
  double acc = 0.0;
  for (int k = 0; k <= up_to; ++k) {
    const double lg = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                      std::lgamma(n - k + 1.0) + k * std::log(p) +
                      (n - k) * std::log1p(-p);
    acc += std::exp(lg);
  }
  return std::min(acc, 1.0);
}

Eigen::MatrixXd draw_gain_matrix(int k, const GainDistribution& dist,
                                 Rng& rng) {
  Eigen::MatrixXd g(k, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) g(j, i) = dist.sample(rng);
  return g;
}

// H draw conditioned on the per-time determinant rule.
Eigen::MatrixXd draw_conditioned_h(int k, const GainDistribution& dist,
                                   double h_det_min, Rng& rng) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Eigen::MatrixXd h = draw_gain_matrix(k, dist, rng);
    if (std::abs(h.determinant()) > h_det_min) return h;
  }
  throw std::runtime_error("h_det_min rejects essentially every draw");
}

double quantile_with_margin(std::vector<double>& sorted_logs, double epsilon) {
  std::sort(sorted_logs.begin(), sorted_logs.end());
  std::size_t qi = static_cast<std::size_t>(epsilon * sorted_logs.size());
  qi = std::min(qi, sorted_logs.size() - 1);
  // 0.999 margin keeps strict '>' satisfiable when the distribution is a
  // point mass (L = 1 makes |det Ttilde| identically 1)
  return sorted_logs[qi] + std::log(0.999);
}

}  // namespace

TvScheme calibrate(int k, int n, double epsilon, const GainDistribution& dist,
                   int trials, std::uint64_t seed, double power,
                   double noise_var) {
  if (k < 1 || n < 1) throw std::invalid_argument("k and n must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie strictly in (0,1)");
  }
  if (trials < 1000) throw std::invalid_argument("calibration needs >= 1000 trials");
  if (!(power > 0.0)) throw std::invalid_argument("power must be positive");
  if (noise_var < 0.0) throw std::invalid_argument("noise_var must be >= 0");

  const DirectionSet dn = DirectionSet::delta(k, n);
  const DirectionSet dn1 = DirectionSet::delta(k, n + 1);
  const std::size_t L = dn.size();
  const std::size_t d = dn1.size();

  TvScheme inst;
  inst.k = k;
  inst.n = n;
  inst.num_streams = L;
  inst.block_len = d;
  inst.epsilon = epsilon;
  inst.power = power;
  inst.noise_var = noise_var;
  inst.dist = dist;
  inst.calibration_trials = trials;

  // delta: epsilon-quantile of log|det T| and source power normalization
  std::vector<double> log_dets(trials);
  double sum_t2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, 0xA1, static_cast<std::uint64_t>(t)));
    std::vector<Eigen::MatrixXd> rows;
    rows.reserve(d);
    for (std::size_t r = 0; r < d; ++r)
      rows.push_back(draw_gain_matrix(k, dist, rng));
    log_dets[t] = log_abs_det(build_direction_matrix(dn1, rows));
    sum_t2 += evaluate_all(dn, rows[0]).squaredNorm();
  }
  inst.log_det_min_t = quantile_with_margin(log_dets, epsilon);
  if (!std::isfinite(inst.log_det_min_t)) {
    throw std::invalid_argument("degenerate distribution: |det T| quantile is zero");
  }
  inst.gamma_src = std::sqrt(0.9 / (sum_t2 / trials));

  // delta': |det H| level such that a block has more than L good time
  // steps except with probability < epsilon (counts are Binomial(d, p))
  {
    const int n_det = std::max(trials, 20000);
    std::vector<double> dets(n_det);
    Rng rng(derive_seed(seed, 0xA2));
    for (int t = 0; t < n_det; ++t)
      dets[t] = std::abs(draw_gain_matrix(k, dist, rng).determinant());
    std::sort(dets.begin(), dets.end());
    double lo = static_cast<double>(L) / d, hi = 1.0 - 1e-12;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (binomial_cdf(static_cast<int>(L), static_cast<int>(d), mid) <
          epsilon / 2.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    const double p_good = hi;
    std::size_t qi = static_cast<std::size_t>((1.0 - p_good) * n_det);
    qi = std::min(qi, dets.size() - 1);
    inst.h_det_min = dets[qi] * 0.999;
    if (!(inst.h_det_min > 0.0)) {
      throw std::invalid_argument("degenerate distribution: |det H| quantile is zero");
    }
  }

  // delta'' and relay power normalization, over delta'-conditioned rows
  {
    std::vector<double> log_dets_tt(trials);
    double sum_tt2 = 0.0;
    long tt_count = 0;
    for (int t = 0; t < trials; ++t) {
      Rng rng(derive_seed(seed, 0xA3, static_cast<std::uint64_t>(t)));
      std::vector<Eigen::MatrixXd> rows;
      rows.reserve(L);
      for (std::size_t r = 0; r < L; ++r) {
        const Eigen::MatrixXd h =
            draw_conditioned_h(k, dist, inst.h_det_min, rng);
        rows.push_back(h.inverse());
      }
      log_dets_tt[t] = log_abs_det(build_direction_matrix(dn, rows));
      sum_tt2 += evaluate_all(dn1, rows[0]).squaredNorm();
      ++tt_count;
    }
    inst.log_det_min_ttilde = quantile_with_margin(log_dets_tt, epsilon);
    inst.gamma_relay = std::sqrt(0.9 / (k * (sum_tt2 / tt_count)));
  }

  // Relay additive-noise power per unit sigma^2, for the power floor:
  // E[Ztilde^2] = gamma'^2 gamma^-2 sigma^2 E[ ||T^-T ttilde||^2 ]
  {
    const int probes = 24;
    int accepted = 0, attempt = 0;
    double acc = 0.0;
    while (accepted < probes && attempt < probes * 20) {
      Rng rng(derive_seed(seed, 0xA4, static_cast<std::uint64_t>(attempt++)));
      std::vector<Eigen::MatrixXd> rows;
      rows.reserve(d);
      for (std::size_t r = 0; r < d; ++r)
        rows.push_back(draw_gain_matrix(k, dist, rng));
      const Eigen::MatrixXd t_mat = build_direction_matrix(dn1, rows);
      if (!(log_abs_det(t_mat) > inst.log_det_min_t)) continue;
      const Eigen::MatrixXd h =
          draw_conditioned_h(k, dist, inst.h_det_min, rng);
      const Eigen::VectorXd ttilde =
          evaluate_all(dn1, Eigen::MatrixXd(h.inverse()));
      Eigen::PartialPivLU<Eigen::MatrixXd> lu_tr(t_mat.transpose());
      acc += lu_tr.solve(ttilde).squaredNorm();
      ++accepted;
    }
    if (accepted > 0) {
      const double b_hat = acc / accepted;
      inst.relay_noise_unit = inst.gamma_relay * inst.gamma_relay /
                              (inst.gamma_src * inst.gamma_src) * b_hat;
      inst.power_floor = 10.0 * inst.relay_noise_unit * noise_var;
    }
  }

  return inst;
}

Eigen::MatrixXd encode_sources(const TvScheme& inst, const Eigen::MatrixXd& c,
                               const std::vector<Eigen::MatrixXd>& first_hop) {
  const DirectionSet dn = DirectionSet::delta(inst.k, inst.n);
  if (c.rows() != inst.k ||
      c.cols() != static_cast<Eigen::Index>(inst.num_streams)) {
    throw std::invalid_argument("symbol block has wrong shape");
  }
  if (!c.allFinite()) throw std::invalid_argument("non-finite symbols");
  if (first_hop.size() != inst.block_len) {
    throw std::invalid_argument("need one gain matrix per block time step");
  }
  const Eigen::MatrixXd tn = build_direction_matrix(dn, first_hop);  // d x L
  return inst.gamma_src * c * tn.transpose();
}

RelayOutput relay_process(const TvScheme& inst, const Eigen::MatrixXd& received,
                          const std::vector<Eigen::MatrixXd>& first_hop,
                          const std::vector<Eigen::MatrixXd>& second_hop_next) {
  const std::size_t d = inst.block_len;
  if (received.rows() != inst.k ||
      received.cols() != static_cast<Eigen::Index>(d)) {
    throw std::invalid_argument("received block has wrong shape");
  }
  const DirectionSet dn1 = DirectionSet::delta(inst.k, inst.n + 1);

  RelayOutput out;
  out.x = Eigen::MatrixXd::Zero(inst.k, d);
  out.u_hat = Eigen::MatrixXd::Zero(inst.k, d);
  out.active_t.assign(d, false);

  const Eigen::MatrixXd t_mat = build_direction_matrix(dn1, first_hop);
  out.log_abs_det_t = log_abs_det(t_mat);
  out.t_ok = out.log_abs_det_t > inst.log_det_min_t;
  if (!out.t_ok) return out;  // every relay silent for the whole next block

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(t_mat);
  const RefinedSolve rs =
      solve_refined(lu, t_mat, received.transpose() / inst.gamma_src);
  out.u_hat = rs.x.transpose();
  out.solve_residual = rs.residual;

  for (std::size_t t = 0; t < d; ++t) {
    const Eigen::MatrixXd& h = second_hop_next[t];
    if (!(std::abs(h.determinant()) > inst.h_det_min)) continue;
    out.active_t[t] = true;
    const Eigen::VectorXd ttilde =
        evaluate_all(dn1, Eigen::MatrixXd(h.inverse()));
    out.x.col(t) = inst.gamma_relay * (out.u_hat * ttilde);
  }
  return out;
}

BlockOutcome destination_decode(const TvScheme& inst,
                                const Eigen::MatrixXd& received,
                                const std::vector<Eigen::MatrixXd>& second_hop,
                                const std::vector<bool>& relay_active_t,
                                bool relay_t_ok, double relay_log_abs_det_t) {
  const std::size_t d = inst.block_len;
  const std::size_t L = inst.num_streams;
  BlockOutcome out;
  out.log_abs_det_t = relay_log_abs_det_t;
  out.bad_h_count =
      static_cast<int>(std::count(relay_active_t.begin(), relay_active_t.end(), false));

  if (!relay_t_ok) {
    out.cause = ErasureCause::relay_silent;
    return out;
  }
  std::vector<std::size_t> sel;
  sel.reserve(L);
  for (std::size_t t = 0; t < d && sel.size() < L; ++t) {
    if (relay_active_t[t]) sel.push_back(t);
  }
  if (sel.size() < L) {
    out.cause = ErasureCause::not_enough_good_t;
    return out;
  }

  const DirectionSet dn = DirectionSet::delta(inst.k, inst.n);
  std::vector<Eigen::MatrixXd> rows;
  rows.reserve(L);
  for (std::size_t r = 0; r < L; ++r)
    rows.push_back(second_hop[sel[r]].inverse());
  const Eigen::MatrixXd ttilde_mat = build_direction_matrix(dn, rows);
  out.log_abs_det_ttilde = log_abs_det(ttilde_mat);
  if (!(out.log_abs_det_ttilde > inst.log_det_min_ttilde)) {
    out.cause = ErasureCause::ttilde_singular;
    return out;
  }

  Eigen::MatrixXd y_sel(L, inst.k);  // column per destination
  for (std::size_t r = 0; r < L; ++r)
    y_sel.row(r) = received.col(sel[r]).transpose();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(ttilde_mat);
  const RefinedSolve rs =
      solve_refined(lu, ttilde_mat, y_sel / inst.gamma_relay);
  out.c_hat = rs.x.transpose();
  out.solve_residual = rs.residual;
  out.numerical_erasure = rs.residual > kNumericalErasureTol;
  out.erased = false;
  out.cause = ErasureCause::none;
  return out;
}

EndToEndMap end_to_end_map(const TvScheme& inst,
                           const std::vector<Eigen::MatrixXd>& first_hop,
                           const std::vector<Eigen::MatrixXd>& second_hop) {
  const std::size_t d = inst.block_len;
  const std::size_t L = inst.num_streams;
  const int k = inst.k;
  const DirectionSet dn = DirectionSet::delta(k, inst.n);
  const DirectionSet dn1 = DirectionSet::delta(k, inst.n + 1);

  EndToEndMap out;

  const Eigen::MatrixXd t_mat = build_direction_matrix(dn1, first_hop);
  if (!(log_abs_det(t_mat) > inst.log_det_min_t)) {
    out.cause = ErasureCause::relay_silent;
    return out;
  }
  std::vector<bool> active(d, false);
  std::vector<Eigen::MatrixXd> b_mats(d);
  std::vector<std::size_t> sel;
  for (std::size_t t = 0; t < d; ++t) {
    if (std::abs(second_hop[t].determinant()) > inst.h_det_min) {
      active[t] = true;
      b_mats[t] = second_hop[t].inverse();
      if (sel.size() < L) sel.push_back(t);
    }
  }
  if (sel.size() < L) {
    out.cause = ErasureCause::not_enough_good_t;
    return out;
  }
  std::vector<Eigen::MatrixXd> ttilde_rows;
  ttilde_rows.reserve(L);
  for (std::size_t r = 0; r < L; ++r) ttilde_rows.push_back(b_mats[sel[r]]);
  const Eigen::MatrixXd ttilde_mat = build_direction_matrix(dn, ttilde_rows);
  if (!(log_abs_det(ttilde_mat) > inst.log_det_min_ttilde)) {
    out.cause = ErasureCause::ttilde_singular;
    return out;
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu_t(t_mat);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_tt(ttilde_mat);
  const Eigen::MatrixXd tn = build_direction_matrix(dn, first_hop);  // d x L
  std::vector<Eigen::VectorXd> ttilde_t(d);
  for (std::size_t t = 0; t < d; ++t)
    if (active[t]) ttilde_t[t] = evaluate_all(dn1, b_mats[t]);

  const std::size_t kl = static_cast<std::size_t>(k) * L;
  out.map = Eigen::MatrixXd(kl, kl);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, L);
  for (std::size_t col = 0; col < kl; ++col) {
    const int i0 = static_cast<int>(col / L);
    const std::size_t s0 = col % L;
    c(i0, s0) = 1.0;

    const Eigen::MatrixXd x_src = inst.gamma_src * c * tn.transpose();
    Eigen::MatrixXd y_relay(k, d);
    for (std::size_t t = 0; t < d; ++t)
      y_relay.col(t) = first_hop[t] * x_src.col(t);
    const Eigen::MatrixXd u_hat =
        lu_t.solve(y_relay.transpose() / inst.gamma_src).transpose();
    Eigen::MatrixXd x_relay = Eigen::MatrixXd::Zero(k, d);
    for (std::size_t t = 0; t < d; ++t)
      if (active[t]) x_relay.col(t) = inst.gamma_relay * (u_hat * ttilde_t[t]);
    Eigen::MatrixXd y_sel(L, k);
    for (std::size_t r = 0; r < L; ++r)
      y_sel.row(r) = (second_hop[sel[r]] * x_relay.col(sel[r])).transpose();
    const Eigen::MatrixXd c_hat =
        lu_tt.solve(y_sel / inst.gamma_relay).transpose();

    for (int j = 0; j < k; ++j)
      for (std::size_t s = 0; s < L; ++s)
        out.map(static_cast<std::size_t>(j) * L + s, col) = c_hat(j, s);
    c(i0, s0) = 0.0;
  }

  out.erased = false;
  out.cause = ErasureCause::none;
  out.max_off_diagonal = 0.0;
  out.max_diagonal_error = 0.0;
  for (std::size_t r = 0; r < kl; ++r) {
    for (std::size_t cidx = 0; cidx < kl; ++cidx) {
      const double v = out.map(r, cidx);
      if (r == cidx) {
        out.max_diagonal_error = std::max(out.max_diagonal_error,
                                          std::abs(v - 1.0));
      } else {
        out.max_off_diagonal = std::max(out.max_off_diagonal, std::abs(v));
      }
    }
  }
  return out;
}

StreamNoise effective_noise(const TvScheme& inst,
                            const std::vector<Eigen::MatrixXd>& first_hop,
                            const std::vector<Eigen::MatrixXd>& second_hop) {
  const std::size_t d = inst.block_len;
  const std::size_t L = inst.num_streams;
  const int k = inst.k;
  const DirectionSet dn = DirectionSet::delta(k, inst.n);
  const DirectionSet dn1 = DirectionSet::delta(k, inst.n + 1);

  StreamNoise out;
  const Eigen::MatrixXd t_mat = build_direction_matrix(dn1, first_hop);
  out.log_abs_det_t = log_abs_det(t_mat);
  if (!(out.log_abs_det_t > inst.log_det_min_t)) {
    out.cause = ErasureCause::relay_silent;
    return out;
  }
  std::vector<std::size_t> sel;
  int bad = 0;
  for (std::size_t t = 0; t < d; ++t) {
    if (std::abs(second_hop[t].determinant()) > inst.h_det_min) {
      if (sel.size() < L) sel.push_back(t);
    } else {
      ++bad;
    }
  }
  out.bad_h_count = bad;
  if (sel.size() < L) {
    out.cause = ErasureCause::not_enough_good_t;
    return out;
  }
  std::vector<Eigen::MatrixXd> rows;
  rows.reserve(L);
  for (std::size_t r = 0; r < L; ++r)
    rows.push_back(second_hop[sel[r]].inverse());
  const Eigen::MatrixXd ttilde_mat = build_direction_matrix(dn, rows);
  out.log_abs_det_ttilde = log_abs_det(ttilde_mat);
  if (!(out.log_abs_det_ttilde > inst.log_det_min_ttilde)) {
    out.cause = ErasureCause::ttilde_singular;
    return out;
  }

  // Relay-noise rows: (gamma'/gamma) ttilde[t_r]^T T^{-1}
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_tr(t_mat.transpose());
  Eigen::MatrixXd a_rel(L, d);
  for (std::size_t r = 0; r < L; ++r) {
    const Eigen::VectorXd ttilde = evaluate_all(dn1, rows[r]);
    a_rel.row(r) = (inst.gamma_relay / inst.gamma_src) *
                   lu_tr.solve(ttilde).transpose();
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu_tt(ttilde_mat);
  out.variances = Eigen::MatrixXd(k, L);
  Eigen::MatrixXd scaled(L, d);
  for (int j = 0; j < k; ++j) {
    Eigen::MatrixXd covw = Eigen::MatrixXd::Identity(L, L);
    for (int c = 0; c < k; ++c) {
      for (std::size_t r = 0; r < L; ++r)
        scaled.row(r) = second_hop[sel[r]](j, c) * a_rel.row(r);
      covw.noalias() += scaled * scaled.transpose();
    }
    const Eigen::MatrixXd b1 = lu_tt.solve(covw);
    const Eigen::MatrixXd cov = lu_tt.solve(b1.transpose()).transpose();
    out.variances.row(j) =
        (inst.noise_var / (inst.gamma_relay * inst.gamma_relay)) *
        cov.diagonal().transpose();
  }
  out.erased = false;
  out.cause = ErasureCause::none;
  return out;
}

Eigen::VectorXd pair_rates(const TvScheme& inst,
                           const Eigen::MatrixXd& variances, double power) {
  const double prefactor = (1.0 - 3.0 * inst.epsilon) / inst.block_len;
  Eigen::VectorXd rates(variances.rows());
  for (Eigen::Index j = 0; j < variances.rows(); ++j) {
    double acc = 0.0;
    for (Eigen::Index s = 0; s < variances.cols(); ++s) {
      const double v = variances(j, s);
      if (v > 0.0) {
        acc += 0.5 * std::log2(1.0 + power / v);
      } else {
        acc = std::numeric_limits<double>::infinity();
        break;
      }
    }
    rates[j] = prefactor * acc;
  }
  return rates;
}

TvSimReport simulate_blocks(const TvScheme& inst,
                            const ChannelRealization& real, int n_blocks,
                            std::uint64_t seed) {
  const std::size_t d = inst.block_len;
  if (real.k() != inst.k) throw std::invalid_argument("k mismatch");
  if (static_cast<long>(real.t_total()) <
      static_cast<long>(n_blocks + 1) * static_cast<long>(d)) {
    throw std::invalid_argument(
        "realization shorter than (n_blocks+1)*d time steps");
  }
  const std::size_t L = inst.num_streams;
  const int k = inst.k;
  const double sigma = std::sqrt(inst.noise_var);
  const double sym_scale = std::sqrt(inst.power);

  TvSimReport rep;
  rep.n_blocks = n_blocks;
  for (int m = 0; m < n_blocks; ++m) {
    const auto gains1 = real.block_matrices(Hop::first, m, static_cast<int>(d));
    const auto gains2 =
        real.block_matrices(Hop::second, m + 1, static_cast<int>(d));
    const std::uint64_t block_seed =
        derive_seed(seed, 0x51, static_cast<std::uint64_t>(m));
    Rng rng(block_seed);

    Eigen::MatrixXd c(k, L);
    for (int i = 0; i < k; ++i)
      for (std::size_t s = 0; s < L; ++s) c(i, s) = sym_scale * rng.normal();

    const Eigen::MatrixXd x_src = encode_sources(inst, c, gains1);
    Eigen::MatrixXd y_relay(k, d);
    for (std::size_t t = 0; t < d; ++t) {
      y_relay.col(t) = gains1[t] * x_src.col(t);
      for (int j = 0; j < k; ++j) y_relay(j, t) += sigma * rng.normal();
    }
    const RelayOutput ro = relay_process(inst, y_relay, gains1, gains2);
    Eigen::MatrixXd y_dest(k, d);
    for (std::size_t t = 0; t < d; ++t) {
      y_dest.col(t) = gains2[t] * ro.x.col(t);
      for (int j = 0; j < k; ++j) y_dest(j, t) += sigma * rng.normal();
    }
    const BlockOutcome bo = destination_decode(inst, y_dest, gains2,
                                               ro.active_t, ro.t_ok,
                                               ro.log_abs_det_t);

    TvBlockRecord rec;
    rec.block = m;
    rec.seed = block_seed & ((1ULL << 53) - 1);
    rec.erased = bo.erased;
    rec.cause = bo.cause;
    rec.numerical_erasure = bo.numerical_erasure;
    rec.log_abs_det_t = bo.log_abs_det_t;
    rec.log_abs_det_ttilde = bo.log_abs_det_ttilde;
    rec.bad_h_count = bo.bad_h_count;
    rec.solve_residual = std::max(bo.solve_residual, ro.solve_residual);
    if (!bo.erased) {
      rec.mse = (bo.c_hat - c).squaredNorm() / (k * L);
      const StreamNoise sn = effective_noise(inst, gains1, gains2);
      if (!sn.erased) {
        rec.sum_rate = pair_rates(inst, sn.variances, inst.power).sum();
      }
      rep.mean_mse += rec.mse;
      rep.mean_sum_rate += rec.sum_rate;
    } else {
      ++rep.erased;
    }
    if (rec.numerical_erasure) ++rep.numerical_erasures;
    rep.max_solve_residual = std::max(rep.max_solve_residual, rec.solve_residual);
    rep.blocks.push_back(rec);
  }
  const int ok = rep.n_blocks - rep.erased;
  if (ok > 0) {
    rep.mean_mse /= ok;
    rep.mean_sum_rate /= ok;
  }
  rep.erasure_freq = static_cast<double>(rep.erased) / std::max(1, rep.n_blocks);
  return rep;
}

}  // namespace netdiag
