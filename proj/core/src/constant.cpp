#include "netdiag/constant.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "netdiag/errors.hpp"

namespace netdiag {

namespace {

// Lexicographically ascending odometer over [-bound, bound]^m. Returns
// false once the range is exhausted.
bool next_tuple(std::vector<long>& u, long bound) {
  int p = static_cast<int>(u.size()) - 1;
  while (p >= 0 && u[p] == bound) {
    u[p] = -bound;
    --p;
  }
  if (p < 0) return false;
  ++u[p];
  return true;
}

void check_enum_budget(std::size_t m, long per_coord, double budget,
                       const char* what) {
  const double points = std::pow(static_cast<double>(per_coord), m);
  if (points > budget) {
    throw BudgetExceeded(std::string(what) + ": " + std::to_string(points) +
                         " enumeration points exceed budget " +
                         std::to_string(budget));
  }
}

}  // namespace

ConstScheme make_instance(int k, int n, double epsilon, double power,
                          double noise_var, const ChannelRealization& draw) {
  if (k < 1 || n < 1) throw std::invalid_argument("k and n must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie strictly in (0,1)");
  }
  if (!(power > 1.0)) throw std::invalid_argument("power must exceed 1");
  if (noise_var < 0.0) throw std::invalid_argument("noise_var must be >= 0");
  if (!draw.constant() || draw.k() != k) {
    throw std::invalid_argument("need a constant channel draw of matching k");
  }

  ConstScheme inst;
  inst.k = k;
  inst.n = n;
  inst.dn = DirectionSet::delta(k, n);
  inst.dn1 = DirectionSet::delta(k, n + 1);
  inst.num_streams = inst.dn.size();
  inst.block_len = inst.dn1.size();
  inst.epsilon = epsilon;
  inst.power = power;
  inst.noise_var = noise_var;

  const double d = static_cast<double>(inst.block_len);
  const double exp_q = (1.0 - epsilon) / (2.0 * (d + epsilon));
  const double exp_gamma = (d - 1.0 + 2.0 * epsilon) / (2.0 * (d + epsilon));
  inst.q = static_cast<long>(std::floor(std::pow(power, exp_q)));
  if (inst.q < 1) {
    throw std::invalid_argument("power too small: symbol alphabet is empty");
  }

  inst.h1 = draw.hop_matrix(Hop::first, 0);
  inst.h2 = draw.hop_matrix(Hop::second, 0);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(inst.h2);
  if (!lu.isInvertible()) {
    throw std::invalid_argument("second-hop matrix is singular");
  }
  inst.b = lu.inverse();
  inst.t_src = evaluate_all(inst.dn, inst.h1);
  inst.t_recv = evaluate_all(inst.dn1, inst.h1);
  inst.t_relay = evaluate_all(inst.dn1, inst.b);
  inst.t_dest = evaluate_all(inst.dn, inst.b);

  inst.beta = 1.0 / inst.t_src.cwiseAbs().sum();
  inst.beta_relay = 1.0 / (k * inst.t_relay.cwiseAbs().sum());
  inst.p_scale = std::pow(power, exp_gamma);
  inst.gamma_src = inst.beta * inst.p_scale;
  inst.gamma_relay = inst.beta_relay * inst.p_scale;
  return inst;
}

SupportSet support_set(const ConstScheme& inst, int relay_j) {
  if (relay_j < 0 || relay_j >= inst.k) {
    throw std::invalid_argument("relay index out of range");
  }
  std::set<std::size_t> idx;
  for (const auto& s : inst.dn.members()) {
    for (int i = 0; i < inst.k; ++i) {
      idx.insert(*inst.dn1.index_of(shift(s, i, relay_j, inst.k)));
    }
  }
  return SupportSet{relay_j, {idx.begin(), idx.end()}};
}

Eigen::VectorXd encode_sources_const(const ConstScheme& inst,
                                     const MatrixXl& c) {
  if (c.rows() != inst.k ||
      c.cols() != static_cast<Eigen::Index>(inst.num_streams)) {
    throw std::invalid_argument("symbol block has wrong shape");
  }
  if ((c.cwiseAbs().maxCoeff()) > inst.q) {
    throw std::invalid_argument("symbol out of alphabet [-Q, Q]");
  }
  return inst.gamma_src * (c.cast<double>() * inst.t_src);
}

VectorXl relay_decode_nearest(const ConstScheme& inst, double y,
                              const SupportSet& support, double budget) {
  const std::size_t m = support.members.size();
  const long bound = static_cast<long>(inst.k) * inst.q;
  check_enum_budget(m, 2 * bound + 1, budget, "relay decode");

  std::vector<double> dirs(m);
  for (std::size_t a = 0; a < m; ++a)
    dirs[a] = inst.gamma_src * inst.t_recv[support.members[a]];

  std::vector<long> u(m, -bound), best_u;
  double best = std::numeric_limits<double>::infinity();
  do {
    double v = 0.0;
    for (std::size_t a = 0; a < m; ++a) v += dirs[a] * u[a];
    const double dist = std::abs(y - v);
    if (dist < best) {  // ties keep the earlier (lex smaller) tuple
      best = dist;
      best_u = u;
    }
  } while (next_tuple(u, bound));

  VectorXl full = VectorXl::Zero(inst.block_len);
  for (std::size_t a = 0; a < m; ++a) full[support.members[a]] = best_u[a];
  return full;
}

double min_distance_oracle(const Eigen::VectorXd& dirs, long bound,
                           double scale, double budget) {
  const std::size_t m = dirs.size();
  const long b2 = 2 * bound;
  check_enum_budget(m, 2 * b2 + 1, budget, "min-distance oracle");

  std::vector<long> du(m, -b2);
  double best = std::numeric_limits<double>::infinity();
  do {
    bool zero = true;
    for (long v : du)
      if (v != 0) {
        zero = false;
        break;
      }
    if (zero) continue;
    double v = 0.0;
    for (std::size_t a = 0; a < m; ++a) v += dirs[a] * du[a];
    best = std::min(best, std::abs(scale * v));
  } while (next_tuple(du, b2));
  return best;
}

Eigen::VectorXd relay_reencode(const ConstScheme& inst, const MatrixXl& u) {
  if (u.rows() != inst.k ||
      u.cols() != static_cast<Eigen::Index>(inst.block_len)) {
    throw std::invalid_argument("relay coefficients have wrong shape");
  }
  return inst.gamma_relay * (u.cast<double>() * inst.t_relay);
}

VectorXl destination_decode_nearest(const ConstScheme& inst, double y,
                                    double budget) {
  const std::size_t m = inst.num_streams;
  check_enum_budget(m, 2 * inst.q + 1, budget, "destination decode");

  std::vector<long> c(m, -inst.q), best_c;
  double best = std::numeric_limits<double>::infinity();
  do {
    double v = 0.0;
    for (std::size_t a = 0; a < m; ++a)
      v += inst.gamma_relay * inst.t_dest[a] * c[a];
    const double dist = std::abs(y - v);
    if (dist < best) {
      best = dist;
      best_c = c;
    }
  } while (next_tuple(c, inst.q));

  VectorXl out(m);
  for (std::size_t a = 0; a < m; ++a) out[a] = best_c[a];
  return out;
}

MinDistances min_distances(const ConstScheme& inst, double budget) {
  MinDistances out;
  out.relay = std::numeric_limits<double>::infinity();
  for (int j = 0; j < inst.k; ++j) {
    const SupportSet sup = support_set(inst, j);
    Eigen::VectorXd dirs(sup.members.size());
    for (std::size_t a = 0; a < sup.members.size(); ++a)
      dirs[a] = inst.t_recv[sup.members[a]];
    out.relay = std::min(
        out.relay, min_distance_oracle(dirs, inst.k * inst.q,
                                       inst.gamma_src, budget));
  }
  out.dest =
      min_distance_oracle(inst.t_dest, inst.q, inst.gamma_relay, budget);
  return out;
}

bool draw_acceptable(const ConstScheme& inst, double budget) {
  const MinDistances md = min_distances(inst, budget);
  return md.relay > 1e-9 * inst.gamma_src && md.dest > 1e-9 * inst.gamma_relay;
}

ConstSweepReport symbol_error_sweep(int k, int n, double epsilon,
                                    double noise_var,
                                    const GainDistribution& dist,
                                    const std::vector<double>& p_grid,
                                    int trials, std::uint64_t seed,
                                    double budget) {
  if (p_grid.empty()) throw std::invalid_argument("empty power grid");
  ConstSweepReport rep;

  // One accepted channel; the min-distance rule must hold at every grid
  // power since Q and the scalings move with P.
  std::vector<ConstScheme> insts;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const ChannelRealization draw = sample_constant(
        k, dist, derive_seed(seed, 0xC0, static_cast<std::uint64_t>(attempt)));
    insts.clear();
    bool ok = true;
    for (double p : p_grid) {
      ConstScheme inst = make_instance(k, n, epsilon, p, noise_var, draw);
      if (!draw_acceptable(inst, budget)) {
        ok = false;
        break;
      }
      insts.push_back(std::move(inst));
    }
    if (ok) {
      rep.channel_seed = draw.seed();
      break;
    }
    ++rep.channel_rejections;
  }
  if (insts.size() != p_grid.size()) {
    throw std::runtime_error("no acceptable constant channel in 1000 draws");
  }

  const double sigma = std::sqrt(noise_var);
  for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
    const ConstScheme& inst = insts[pi];
    const MinDistances md = min_distances(inst, budget);
    std::vector<SupportSet> sups;
    for (int j = 0; j < k; ++j) sups.push_back(support_set(inst, j));

    long relay_err = 0, relay_tot = 0;
    long dest_err = 0, e2e_err = 0, dest_tot = 0;
    for (int t = 0; t < trials; ++t) {
      Rng rng(derive_seed(seed, 0xC1 + pi, static_cast<std::uint64_t>(t)));
      MatrixXl c(k, inst.num_streams);
      for (int i = 0; i < k; ++i)
        for (std::size_t s = 0; s < inst.num_streams; ++s)
          c(i, s) = rng.uniform_int(-inst.q, inst.q);

      const Eigen::VectorXd x_src = encode_sources_const(inst, c);
      MatrixXl u_hat(k, inst.block_len);
      MatrixXl u_true(k, inst.block_len);
      for (int j = 0; j < k; ++j) {
        double y = 0.0;
        for (int i = 0; i < k; ++i) y += inst.h1(j, i) * x_src[i];
        y += sigma * rng.normal();
        u_hat.row(j) = relay_decode_nearest(inst, y, sups[j], budget).transpose();
        u_true.row(j) = compute_u_int(c, j, inst.dn, inst.dn1).transpose();
        for (std::size_t a : sups[j].members) {
          ++relay_tot;
          if (u_hat(j, a) != u_true(j, a)) ++relay_err;
        }
      }

      const Eigen::VectorXd x_relay = relay_reencode(inst, u_hat);
      const Eigen::VectorXd x_relay_genie = relay_reencode(inst, u_true);
      for (int j = 0; j < k; ++j) {
        const double z = sigma * rng.normal();
        double y = z, y_genie = z;
        for (int i = 0; i < k; ++i) {
          y += inst.h2(j, i) * x_relay[i];
          y_genie += inst.h2(j, i) * x_relay_genie[i];
        }
        const VectorXl c_hat = destination_decode_nearest(inst, y, budget);
        const VectorXl c_genie =
            destination_decode_nearest(inst, y_genie, budget);
        for (std::size_t s = 0; s < inst.num_streams; ++s) {
          ++dest_tot;
          if (c_hat[s] != c(j, s)) ++e2e_err;
          if (c_genie[s] != c(j, s)) ++dest_err;
        }
      }
    }

    ConstSweepPoint pt;
    pt.power = p_grid[pi];
    pt.q = inst.q;
    pt.trials = trials;
    pt.relay_ser = relay_tot ? static_cast<double>(relay_err) / relay_tot : 0.0;
    pt.dest_ser = dest_tot ? static_cast<double>(dest_err) / dest_tot : 0.0;
    pt.e2e_ser = dest_tot ? static_cast<double>(e2e_err) / dest_tot : 0.0;
    pt.relay_min_dist = md.relay;
    pt.dest_min_dist = md.dest;
    rep.points.push_back(pt);
  }

  // monotone non-increase of the end-to-end rate within 95% binomial bands
  auto band = [&](const ConstSweepPoint& p) {
    const double nsym = static_cast<double>(p.trials) * k *
                        static_cast<double>(insts[0].num_streams);
    return 1.96 * std::sqrt(std::max(p.e2e_ser * (1.0 - p.e2e_ser), 0.0) /
                            std::max(nsym, 1.0));
  };
  for (std::size_t i = 0; i + 1 < rep.points.size(); ++i) {
    const double upper_i = rep.points[i].e2e_ser + band(rep.points[i]);
    const double lower_next = rep.points[i + 1].e2e_ser - band(rep.points[i + 1]);
    if (lower_next > upper_i) rep.monotone_within_bands = false;
  }
  return rep;
}

}  // namespace netdiag
