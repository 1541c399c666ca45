#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "netdiag/constant.hpp"
#include "netdiag/dof.hpp"
#include "netdiag/errors.hpp"

using namespace netdiag;

namespace {

ChannelRealization accepted_draw(int k, double power, int n, double epsilon,
                                 std::uint64_t seed0) {
  for (std::uint64_t s = seed0; s < seed0 + 200; ++s) {
    const auto draw = sample_constant(k, default_gain_distribution(), s);
    const ConstScheme inst = make_instance(k, n, epsilon, power, 1.0, draw);
    if (draw_acceptable(inst)) return draw;
  }
  throw std::runtime_error("no acceptable draw");
}

}  // namespace

TEST_CASE("instance arithmetic: alphabet bound and scaling exponents") {
  const auto draw = sample_constant(1, default_gain_distribution(), 3);
  const double eps = 0.1, P = 1e4;
  const ConstScheme inst = make_instance(1, 1, eps, P, 1.0, draw);
  CHECK(inst.block_len == 2);
  CHECK(inst.num_streams == 1);
  // Q = floor(P^((1-eps)/(2(d+eps)))) with d = 2
  const long q_expect =
      static_cast<long>(std::floor(std::pow(P, 0.9 / (2.0 * 2.1))));
  CHECK(inst.q == q_expect);
  // gamma/beta == gamma'/beta' == P^((d-1+2eps)/(2(d+eps))) exactly
  CHECK(inst.p_scale ==
        doctest::Approx(std::pow(P, 1.2 / 4.2)).epsilon(1e-14));
  CHECK(inst.gamma_src == inst.beta * inst.p_scale);
  CHECK(inst.gamma_relay == inst.beta_relay * inst.p_scale);
}

TEST_CASE("beta depends on the channel draw, not on P") {
  const auto draw = sample_constant(2, default_gain_distribution(), 7);
  const ConstScheme a = make_instance(2, 1, 0.2, 1e4, 1.0, draw);
  const ConstScheme b = make_instance(2, 1, 0.2, 2e4, 1.0, draw);
  CHECK(a.beta == b.beta);
  CHECK(a.beta_relay == b.beta_relay);
}

TEST_CASE("power at or below one is rejected") {
  const auto draw = sample_constant(2, default_gain_distribution(), 7);
  // P <= 1 empties the alphabet: the exponent is positive, so Q >= 1
  // exactly when P > 1
  CHECK_THROWS_AS(make_instance(2, 1, 0.2, 1.0, 1.0, draw),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_instance(2, 1, 0.2, 0.5, 1.0, draw),
                  std::invalid_argument);
  CHECK(make_instance(2, 1, 0.2, 1.0001, 1.0, draw).q == 1);
}

TEST_CASE("worst-case transmit amplitude stays within sqrt(P), by enumeration") {
  const double P = 5e4;
  const auto draw = accepted_draw(2, P, 1, 0.2, 11);
  const ConstScheme inst = make_instance(2, 1, 0.2, P, 1.0, draw);

  // sources: enumerate every symbol tuple of one source (L = 1)
  double worst_src = 0.0;
  for (long c = -inst.q; c <= inst.q; ++c) {
    MatrixXl cm(2, 1);
    cm << c, -c;
    const Eigen::VectorXd x = encode_sources_const(inst, cm);
    worst_src = std::max(worst_src, x.cwiseAbs().maxCoeff());
  }
  CHECK(worst_src <= std::sqrt(P) * (1.0 + 1e-12));

  // relays: enumerate u tuples on the support with the K*Q bound
  const SupportSet sup = support_set(inst, 0);
  const long bound = 2 * inst.q;
  double worst_relay = 0.0;
  std::vector<long> u(sup.members.size(), -bound);
  for (;;) {
    MatrixXl um = MatrixXl::Zero(2, inst.block_len);
    for (std::size_t a = 0; a < sup.members.size(); ++a)
      um(0, sup.members[a]) = u[a];
    worst_relay =
        std::max(worst_relay, std::abs(relay_reencode(inst, um)[0]));
    int p = static_cast<int>(u.size()) - 1;
    while (p >= 0 && u[p] == bound) {
      u[p] = -bound;
      --p;
    }
    if (p < 0) break;
    ++u[p];
  }
  CHECK(worst_relay <= std::sqrt(P) * (1.0 + 1e-12));
}

TEST_CASE("encode rejects symbols outside the alphabet") {
  const auto draw = sample_constant(2, default_gain_distribution(), 7);
  const ConstScheme inst = make_instance(2, 1, 0.2, 1e4, 1.0, draw);
  MatrixXl c(2, 1);
  c << inst.q + 1, 0;
  CHECK_THROWS_AS(encode_sources_const(inst, c), std::invalid_argument);
  c << 0, 0;
  CHECK(encode_sources_const(inst, c).isZero());
}

TEST_CASE("support set matches the alignment shifts") {
  const auto draw = sample_constant(2, default_gain_distribution(), 7);
  const ConstScheme inst = make_instance(2, 1, 0.2, 1e4, 1.0, draw);
  for (int j = 0; j < 2; ++j) {
    const SupportSet sup = support_set(inst, j);
    CHECK(sup.members.size() == 2);  // K * N^(K^2) = 2 distinct shifts
    for (std::size_t a : sup.members) {
      const auto& s = inst.dn1.member(a);
      int total = 0;
      for (int e : s) total += e;
      CHECK(total == 1);  // all shifts of the all-zero vector
    }
  }
}

TEST_CASE("relay alignment: received scalar equals the aligned-form sum") {
  // sum_i h1(j,i) X_i == gamma * sum_{Delta_N1} T_s u_{j,s} at zero noise
  Rng rng(19);
  int checked = 0;
  for (std::uint64_t seed = 300; checked < 40; ++seed) {
    const auto draw = sample_constant(2, default_gain_distribution(), seed);
    ConstScheme inst;
    try {
      inst = make_instance(2, 1, 0.2, 3e4, 1.0, draw);
    } catch (const std::invalid_argument&) {
      continue;
    }
    ++checked;
    MatrixXl c(2, 1);
    c << rng.uniform_int(-inst.q, inst.q), rng.uniform_int(-inst.q, inst.q);
    const Eigen::VectorXd x = encode_sources_const(inst, c);
    for (int j = 0; j < 2; ++j) {
      const double received = inst.h1(j, 0) * x[0] + inst.h1(j, 1) * x[1];
      const Eigen::VectorXd u =
          compute_u_int(c, j, inst.dn, inst.dn1).cast<double>();
      const double aligned = inst.gamma_src * inst.t_recv.dot(u);
      const double scale = std::max(std::abs(aligned), 1e-9);
      CHECK(std::abs(received - aligned) / scale <= 1e-12);
    }
  }
}

TEST_CASE("cancellation: destinations hear only their own source's symbols") {
  // noiseless destination scalar == gamma' * sum_{Delta_N} Ttilde_s c_{j,s}
  Rng rng(20);
  int checked = 0;
  for (std::uint64_t seed = 400; checked < 40; ++seed) {
    const auto draw = sample_constant(2, default_gain_distribution(), seed);
    ConstScheme inst;
    try {
      inst = make_instance(2, 1, 0.2, 3e4, 1.0, draw);
    } catch (const std::invalid_argument&) {
      continue;
    }
    ++checked;
    MatrixXl c(2, 1);
    c << rng.uniform_int(-inst.q, inst.q), rng.uniform_int(-inst.q, inst.q);
    MatrixXl um(2, inst.block_len);
    for (int j = 0; j < 2; ++j)
      um.row(j) = compute_u_int(c, j, inst.dn, inst.dn1).transpose();
    const Eigen::VectorXd xv = relay_reencode(inst, um);
    for (int j = 0; j < 2; ++j) {
      const double received = inst.h2(j, 0) * xv[0] + inst.h2(j, 1) * xv[1];
      double own = 0.0;
      for (std::size_t s = 0; s < inst.num_streams; ++s)
        own += inst.t_dest[s] * c(j, s);
      own *= inst.gamma_relay;
      const double scale =
          std::max(inst.gamma_relay * static_cast<double>(inst.q), 1e-9);
      CHECK(std::abs(received - own) / scale <= 1e-10);
    }
  }
}

TEST_CASE("relay decode recovers the true integers at zero noise") {
  const double P = 1e5;
  const auto draw = accepted_draw(2, P, 1, 0.2, 23);
  const ConstScheme inst = make_instance(2, 1, 0.2, P, 1.0, draw);
  const SupportSet sup0 = support_set(inst, 0);
  for (long c1 = -inst.q; c1 <= inst.q; ++c1) {
    for (long c2 = -inst.q; c2 <= inst.q; ++c2) {
      MatrixXl c(2, 1);
      c << c1, c2;
      const Eigen::VectorXd x = encode_sources_const(inst, c);
      const double y = inst.h1(0, 0) * x[0] + inst.h1(0, 1) * x[1];
      const VectorXl u_hat = relay_decode_nearest(inst, y, sup0);
      const VectorXl u_true = compute_u_int(c, 0, inst.dn, inst.dn1);
      CHECK(u_hat == u_true);
    }
  }
}

TEST_CASE("midway received point resolves to the lex-smaller tuple") {
  // hand-built instance: two directions {1, 3}, unit scale
  ConstScheme inst;
  inst.k = 1;
  inst.n = 1;
  inst.dn = DirectionSet::delta(1, 1);
  inst.dn1 = DirectionSet::delta(1, 2);
  inst.num_streams = 1;
  inst.block_len = 2;
  inst.q = 1;
  inst.gamma_src = 1.0;
  inst.gamma_relay = 1.0;
  inst.t_recv = Eigen::VectorXd(2);
  inst.t_recv << 1.0, 3.0;
  inst.t_dest = Eigen::VectorXd(1);
  inst.t_dest << 1.0;
  SupportSet sup{0, {0, 1}};
  // y = 0.5 sits exactly between (0,0) -> 0 and (1,0) -> 1
  const VectorXl u = relay_decode_nearest(inst, 0.5, sup);
  CHECK(u[0] == 0);  // lex-smaller of the two minimizers
  CHECK(u[1] == 0);
  // destination: y midway between gamma'*0 and gamma'*1
  const VectorXl c = destination_decode_nearest(inst, 0.5);
  CHECK(c[0] == 0);
}

TEST_CASE("min-distance oracle hand cases") {
  // single direction 1, bound 1, scale gamma: spacing of gamma * Z
  Eigen::VectorXd one(1);
  one << 1.0;
  CHECK(min_distance_oracle(one, 1, 2.5) == doctest::Approx(2.5));

  // two directions {1, h}: min over the 8 nonzero tuples with |du| <= 2
  Eigen::VectorXd two(2);
  const double h = 1.2345678901;
  two << 1.0, h;
  double expect = std::numeric_limits<double>::infinity();
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b)
      if (a || b) expect = std::min(expect, std::abs(a + b * h));
  CHECK(min_distance_oracle(two, 1, 1.0) == doctest::Approx(expect));
}

TEST_CASE("min distance grows with P at the rate the bound predicts") {
  int tested = 0;
  for (std::uint64_t seed = 40; seed < 80 && tested < 20; ++seed) {
    const auto draw = sample_constant(2, default_gain_distribution(), seed);
    const double eps = 0.2, P = 1e4;
    ConstScheme lo, hi;
    try {
      lo = make_instance(2, 1, eps, P, 1.0, draw);
      hi = make_instance(2, 1, eps, 16.0 * P, 1.0, draw);
    } catch (const std::invalid_argument&) {
      continue;
    }
    if (!draw_acceptable(lo) || !draw_acceptable(hi)) continue;
    ++tested;
    const MinDistances mlo = min_distances(lo);
    const MinDistances mhi = min_distances(hi);
    const double predicted = std::pow(16.0, eps / 2.0);
    CHECK(mhi.relay / mlo.relay >= predicted / 4.0);
    CHECK(mhi.dest / mlo.dest >= predicted / 4.0);
  }
  CHECK(tested >= 10);
}

TEST_CASE("noise below half the oracle minimum distance never misdecodes") {
  const double P = 1e5;
  const auto draw = accepted_draw(2, P, 1, 0.2, 31);
  const ConstScheme inst = make_instance(2, 1, 0.2, P, 1.0, draw);
  const SupportSet sup = support_set(inst, 1);
  const MinDistances md = min_distances(inst);
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    MatrixXl c(2, 1);
    c << rng.uniform_int(-inst.q, inst.q), rng.uniform_int(-inst.q, inst.q);
    const Eigen::VectorXd x = encode_sources_const(inst, c);
    const double clean = inst.h1(1, 0) * x[0] + inst.h1(1, 1) * x[1];
    const double noise = rng.uniform(-0.499, 0.499) * md.relay;
    const VectorXl u_hat = relay_decode_nearest(inst, clean + noise, sup);
    CHECK(u_hat == compute_u_int(c, 1, inst.dn, inst.dn1));
  }
}

TEST_CASE("relay re-encode: scalar case and the factored-form equivalence") {
  // K=1: output is gamma' * (1/h)^e weighted sum
  const auto draw1 = sample_constant(1, default_gain_distribution(), 3);
  const ConstScheme k1 = make_instance(1, 1, 0.1, 1e4, 1.0, draw1);
  MatrixXl u(1, 2);
  u << 2, -3;
  const double h = k1.h2(0, 0);
  const double expect = k1.gamma_relay * (2.0 - 3.0 / h);
  CHECK(relay_reencode(k1, u)[0] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(relay_reencode(k1, MatrixXl::Zero(1, 2)).isZero());

  // K=2, N=1: re-encode of exact u equals the factored form
  Rng rng(6);
  int checked = 0;
  for (std::uint64_t seed = 60; seed < 120 && checked < 100; ++seed) {
    const auto draw = sample_constant(2, default_gain_distribution(), seed);
    ConstScheme inst;
    try {
      inst = make_instance(2, 1, 0.2, 1e4, 1.0, draw);
    } catch (const std::invalid_argument&) {
      continue;
    }
    for (int rep = 0; rep < 3; ++rep) {
      ++checked;
      MatrixXl c(2, 1);
      c << rng.uniform_int(-inst.q, inst.q), rng.uniform_int(-inst.q, inst.q);
      MatrixXl um(2, inst.block_len);
      for (int j = 0; j < 2; ++j)
        um.row(j) = compute_u_int(c, j, inst.dn, inst.dn1).transpose();
      const Eigen::VectorXd aligned = relay_reencode(inst, um);
      for (int j = 0; j < 2; ++j) {
        double factored = 0.0;
        for (std::size_t s = 0; s < inst.num_streams; ++s) {
          double mix = 0.0;
          for (int i = 0; i < 2; ++i) mix += inst.b(j, i) * c(i, s);
          factored += inst.t_dest[s] * mix;
        }
        factored *= inst.gamma_relay;
        const double scale = std::max(std::abs(factored), 1e-6);
        CHECK(std::abs(aligned[j] - factored) / scale <= 1e-10);
      }
    }
  }
  CHECK(checked >= 50);
}

TEST_CASE("zero-noise end-to-end decode is exact for every tuple (Q=1,2)") {
  for (double P : {2e4, 2e12}) {  // Q = 1 and Q = 2 at eps = 0.2, d = 16
    const auto draw = accepted_draw(2, P, 1, 0.2, 51);
    const ConstScheme inst = make_instance(2, 1, 0.2, P, 1.0, draw);
    INFO("P=", P, " Q=", inst.q);
    std::vector<SupportSet> sups{support_set(inst, 0), support_set(inst, 1)};
    for (long c1 = -inst.q; c1 <= inst.q; ++c1) {
      for (long c2 = -inst.q; c2 <= inst.q; ++c2) {
        MatrixXl c(2, 1);
        c << c1, c2;
        const Eigen::VectorXd x = encode_sources_const(inst, c);
        MatrixXl u_hat(2, inst.block_len);
        for (int j = 0; j < 2; ++j) {
          const double y = inst.h1(j, 0) * x[0] + inst.h1(j, 1) * x[1];
          u_hat.row(j) =
              relay_decode_nearest(inst, y, sups[j]).transpose();
        }
        const Eigen::VectorXd xv = relay_reencode(inst, u_hat);
        for (int j = 0; j < 2; ++j) {
          const double y = inst.h2(j, 0) * xv[0] + inst.h2(j, 1) * xv[1];
          const VectorXl c_hat = destination_decode_nearest(inst, y);
          CHECK(c_hat[0] == c(j, 0));
        }
      }
    }
  }
}

TEST_CASE("K=1 chain decodes whenever both noises are below half spacing") {
  const double P = 1e4;
  const auto draw = sample_constant(1, default_gain_distribution(), 3);
  const ConstScheme inst = make_instance(1, 1, 0.1, P, 1.0, draw);
  const SupportSet sup = support_set(inst, 0);
  const MinDistances md = min_distances(inst);
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    MatrixXl c(1, 1);
    c << rng.uniform_int(-inst.q, inst.q);
    const Eigen::VectorXd x = encode_sources_const(inst, c);
    const double y1 =
        inst.h1(0, 0) * x[0] + rng.uniform(-0.49, 0.49) * md.relay;
    const VectorXl u_hat = relay_decode_nearest(inst, y1, sup);
    REQUIRE(u_hat == compute_u_int(c, 0, inst.dn, inst.dn1));
    MatrixXl um(1, inst.block_len);
    um.row(0) = u_hat.transpose();
    const Eigen::VectorXd xv = relay_reencode(inst, um);
    const double y2 =
        inst.h2(0, 0) * xv[0] + rng.uniform(-0.49, 0.49) * md.dest;
    CHECK(destination_decode_nearest(inst, y2)[0] == c(0, 0));
  }
}

TEST_CASE("enumeration budget guards") {
  const auto draw = sample_constant(2, default_gain_distribution(), 7);
  const ConstScheme inst = make_instance(2, 1, 0.2, 1e4, 1.0, draw);
  const SupportSet sup = support_set(inst, 0);
  CHECK_THROWS_AS(relay_decode_nearest(inst, 0.0, sup, /*budget=*/4.0),
                  BudgetExceeded);
  Eigen::VectorXd dirs(3);
  dirs << 1.0, 0.5, 0.25;
  CHECK_THROWS_AS(min_distance_oracle(dirs, 10, 1.0, /*budget=*/100.0),
                  BudgetExceeded);
}

TEST_CASE("per-pair degrees of freedom as exact rationals") {
  // (1-eps) N^(K^2) / ((N+1)^(K^2) + eps), eps = 1/10
  const Rational eps(1, 10);
  CHECK(const_pair_dof(1, 1, eps) == Rational(9, 21));   // 3/7
  CHECK(const_pair_dof(2, 1, eps) == Rational(9, 161));
  // exponent arithmetic for the alphabet: log_P Q-bound = (1-eps)/(2(d+eps))
  // d = 16, eps = 1/10: (9/10) / (2 * 161/10) = 9/322
  const Rational d_plus_eps = Rational(16) + eps;
  const Rational exponent = (Rational(1) - eps) / (Rational(2) * d_plus_eps);
  CHECK(exponent == Rational(9, 322));
}

TEST_CASE("error sweep: zero noise means zero errors, and noise monotonicity") {
  const std::vector<double> grid{1e3, 1e4};
  const auto clean = symbol_error_sweep(2, 1, 0.2, 0.0,
                                        default_gain_distribution(), grid, 200,
                                        12);
  for (const auto& pt : clean.points) {
    CHECK(pt.relay_ser == 0.0);
    CHECK(pt.dest_ser == 0.0);
    CHECK(pt.e2e_ser == 0.0);
  }

  const auto nominal = symbol_error_sweep(2, 1, 0.2, 1.0,
                                          default_gain_distribution(), grid,
                                          400, 12);
  const auto loud = symbol_error_sweep(2, 1, 0.2, 100.0,
                                       default_gain_distribution(), grid, 400,
                                       12);
  CHECK(loud.points[0].e2e_ser >= nominal.points[0].e2e_ser);

  // determinism
  const auto again = symbol_error_sweep(2, 1, 0.2, 1.0,
                                        default_gain_distribution(), grid, 400,
                                        12);
  CHECK(again.points[0].e2e_ser == nominal.points[0].e2e_ser);
  CHECK(again.channel_seed == nominal.channel_seed);
}
