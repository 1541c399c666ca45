#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>
#include <cmath>
#include <vector>

#include "netdiag/channel.hpp"

using namespace netdiag;

TEST_CASE("degenerate interval gives constant gains") {
  const auto real =
      sample_time_varying(2, 1, GainDistribution::uniform(1.0, 1.0), 99);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i) {
      CHECK(real.gain(Hop::first, 0, j, i) == 1.0);
      CHECK(real.gain(Hop::second, 0, j, i) == 1.0);
    }
}

TEST_CASE("reversed interval is rejected") {
  CHECK_THROWS_AS(GainDistribution::uniform(2.0, 0.5), std::invalid_argument);
}

TEST_CASE("identical seeds give bit-identical realizations") {
  const auto a =
      sample_time_varying(2, 32, GainDistribution::standard_normal(), 7);
  const auto b =
      sample_time_varying(2, 32, GainDistribution::standard_normal(), 7);
  CHECK(a.raw(Hop::first) == b.raw(Hop::first));
  CHECK(a.raw(Hop::second) == b.raw(Hop::second));

  const auto c =
      sample_time_varying(2, 32, GainDistribution::standard_normal(), 8);
  CHECK(a.raw(Hop::first) != c.raw(Hop::first));
}

TEST_CASE("extending the horizon never perturbs earlier draws") {
  const auto shorter = sample_time_varying(2, 10, default_gain_distribution(), 5);
  const auto longer = sample_time_varying(2, 25, default_gain_distribution(), 5);
  for (int t = 0; t < 10; ++t)
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i)
        CHECK(shorter.gain(Hop::first, t, j, i) ==
              longer.gain(Hop::first, t, j, i));
}

TEST_CASE("sample variance matches the analytic value") {
  const int t_total = 10000;
  const auto real = sample_time_varying(
      3, t_total, GainDistribution::standard_normal(), 1);
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) {
      double mean = 0.0, m2 = 0.0;
      for (int t = 0; t < t_total; ++t) mean += real.gain(Hop::first, t, j, i);
      mean /= t_total;
      for (int t = 0; t < t_total; ++t) {
        const double d = real.gain(Hop::first, t, j, i) - mean;
        m2 += d * d;
      }
      const double var = m2 / (t_total - 1);
      CHECK(var > 0.9);
      CHECK(var < 1.1);
    }
  }
}

TEST_CASE("distribution variance matches the analytic value over 1e5 draws") {
  for (const auto& dist :
       {GainDistribution::uniform(-2.0, 2.0), GainDistribution::uniform(0.5, 2.0),
        GainDistribution::standard_normal()}) {
    Rng rng(123);
    const int n = 100000;
    double mean = 0.0;
    std::vector<double> xs(n);
    for (double& x : xs) {
      x = dist.sample(rng);
      mean += x;
    }
    mean /= n;
    double m2 = 0.0;
    for (double x : xs) m2 += (x - mean) * (x - mean);
    const double var = m2 / (n - 1);
    CHECK(std::isfinite(var));
    CHECK(var == doctest::Approx(dist.variance()).epsilon(0.10));
    CHECK(mean == doctest::Approx(dist.mean()).epsilon(0.1).scale(1.0));
  }
}

TEST_CASE("distinct gain processes are empirically uncorrelated") {
  const int t_total = 10000;
  const auto real =
      sample_time_varying(2, t_total, default_gain_distribution(), 17);
  auto corr = [&](Hop ha, int ja, int ia, Hop hb, int jb, int ib) {
    double ma = 0, mb = 0;
    for (int t = 0; t < t_total; ++t) {
      ma += real.gain(ha, t, ja, ia);
      mb += real.gain(hb, t, jb, ib);
    }
    ma /= t_total;
    mb /= t_total;
    double sab = 0, saa = 0, sbb = 0;
    for (int t = 0; t < t_total; ++t) {
      const double da = real.gain(ha, t, ja, ia) - ma;
      const double db = real.gain(hb, t, jb, ib) - mb;
      sab += da * db;
      saa += da * da;
      sbb += db * db;
    }
    return sab / std::sqrt(saa * sbb);
  };
  CHECK(std::abs(corr(Hop::first, 0, 0, Hop::first, 0, 1)) < 0.05);
  CHECK(std::abs(corr(Hop::first, 1, 0, Hop::second, 1, 0)) < 0.05);
  CHECK(std::abs(corr(Hop::second, 0, 1, Hop::second, 1, 1)) < 0.05);
}

TEST_CASE("constant realizations replicate one draw across time") {
  const auto one = sample_constant(1, GainDistribution::uniform(2.0, 2.0), 4, 3);
  for (int t = 0; t < 3; ++t) {
    CHECK(one.gain(Hop::first, t, 0, 0) == 2.0);
    CHECK(one.gain(Hop::second, t, 0, 0) == 2.0);
  }

  const auto real =
      sample_constant(2, GainDistribution::standard_normal(), 3, 8);
  CHECK(real.constant());
  for (int t = 1; t < 8; ++t) {
    CHECK(real.hop_matrix(Hop::first, t) == real.hop_matrix(Hop::first, 0));
    CHECK(real.hop_matrix(Hop::second, t) == real.hop_matrix(Hop::second, 0));
  }
}

TEST_CASE("constant draws are almost surely invertible") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto real =
        sample_constant(2, GainDistribution::standard_normal(), seed);
    CHECK(std::abs(real.hop_matrix(Hop::first, 0).determinant()) > 0.0);
    CHECK(std::abs(real.hop_matrix(Hop::second, 0).determinant()) > 0.0);
  }
}

TEST_CASE("hop_matrix matches raw storage layout") {
  // hand-written 2x2 array round trip
  std::vector<double> first = {1, 2, 3, 4};   // [j][i] at t=0
  std::vector<double> second = {5, 6, 7, 8};
  const ChannelRealization real(2, 1, false, 0, default_gain_distribution(),
                                first, second);
  Eigen::MatrixXd expect(2, 2);
  expect << 1, 2, 3, 4;
  CHECK(real.hop_matrix(Hop::first, 0) == expect);
  CHECK(real.gain(Hop::second, 0, 1, 0) == 7.0);

  const auto drawn = sample_constant(2, GainDistribution::standard_normal(), 3);
  const auto m = drawn.hop_matrix(Hop::second, 0);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i)
      CHECK(m(j, i) == drawn.gain(Hop::second, 0, j, i));
}

TEST_CASE("time index bounds are enforced") {
  const auto real = sample_time_varying(1, 4, default_gain_distribution(), 1);
  CHECK_THROWS_AS(real.hop_matrix(Hop::first, 4), std::out_of_range);
  CHECK_THROWS_AS(real.gain(Hop::first, -1, 0, 0), std::out_of_range);
}

TEST_CASE("json dump/load round trip") {
  const auto real = sample_time_varying(2, 6, default_gain_distribution(), 11);
  const auto j = realization_to_json(real);
  const auto back = realization_from_json(j);
  CHECK(back.k() == real.k());
  CHECK(back.t_total() == real.t_total());
  CHECK(back.constant() == real.constant());
  CHECK(back.seed() == real.seed());
  CHECK(back.raw(Hop::first) == real.raw(Hop::first));
  CHECK(back.raw(Hop::second) == real.raw(Hop::second));

  // serialized text round-trips exactly as well
  const auto text = j.dump();
  const auto back2 = realization_from_json(nlohmann::json::parse(text));
  CHECK(back2.raw(Hop::first) == real.raw(Hop::first));
}
