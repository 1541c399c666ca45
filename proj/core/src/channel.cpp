#include "netdiag/channel.hpp"

#include <nlohmann/json.hpp>
#include <cmath>
#include <stdexcept>

namespace netdiag {

GainDistribution GainDistribution::uniform(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
    throw std::invalid_argument("invalid uniform interval");
  }
  return {GainKind::uniform_interval, lo, hi};
}

double GainDistribution::sample(Rng& rng) const {
  if (kind == GainKind::standard_normal) return rng.normal();
  if (lo > hi) throw std::invalid_argument("uniform interval is reversed");
  return rng.uniform(lo, hi);
}

double GainDistribution::variance() const {
  if (kind == GainKind::standard_normal) return 1.0;
  const double w = hi - lo;
  return w * w / 12.0;
}

double GainDistribution::mean() const {
  if (kind == GainKind::standard_normal) return 0.0;
  return 0.5 * (lo + hi);
}

std::string GainDistribution::describe() const {
  if (kind == GainKind::standard_normal) return "normal";
  return "uniform:" + std::to_string(lo) + ":" + std::to_string(hi);
}

ChannelRealization::ChannelRealization(int k, int t_total, bool constant,
                                       std::uint64_t seed,
                                       GainDistribution dist,
                                       std::vector<double> first,
                                       std::vector<double> second)
    : k_(k),
      t_total_(t_total),
      constant_(constant),
      seed_(seed),
      dist_(dist),
      first_(std::move(first)),
      second_(std::move(second)) {
  const std::size_t want =
      static_cast<std::size_t>(t_total) * k * k;
  if (k < 1 || t_total < 1 || first_.size() != want ||
      second_.size() != want) {
    throw std::invalid_argument("inconsistent realization dimensions");
  }
  for (double g : first_)
    if (!std::isfinite(g)) throw std::invalid_argument("non-finite gain");
  for (double g : second_)
    if (!std::isfinite(g)) throw std::invalid_argument("non-finite gain");
}

double ChannelRealization::gain(Hop hop, int t, int rx_j, int tx_i) const {
  if (t < 0 || t >= t_total_) throw std::out_of_range("time index out of range");
  const auto& v = hop == Hop::first ? first_ : second_;
  return v[(static_cast<std::size_t>(t) * k_ + rx_j) * k_ + tx_i];
}

Eigen::MatrixXd ChannelRealization::hop_matrix(Hop hop, int t) const {
  if (t < 0 || t >= t_total_) throw std::out_of_range("time index out of range");
  Eigen::MatrixXd m(k_, k_);
  for (int j = 0; j < k_; ++j)
    for (int i = 0; i < k_; ++i) m(j, i) = gain(hop, t, j, i);
  return m;
}

std::vector<Eigen::MatrixXd> ChannelRealization::block_matrices(
    Hop hop, int block, int block_len) const {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(block_len);
  for (int r = 0; r < block_len; ++r)
    out.push_back(hop_matrix(hop, block * block_len + r));
  return out;
}

namespace {

// One independent stream per (hop, i, j): adding time steps or trials
// never perturbs the draws of other streams.
std::vector<double> sample_hop(int k, int t_total, const GainDistribution& dist,
                               std::uint64_t seed, int hop_index,
                               bool constant) {
  std::vector<double> v(static_cast<std::size_t>(t_total) * k * k);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < k; ++i) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(hop_index),
                          static_cast<std::uint64_t>(i),
                          static_cast<std::uint64_t>(j)));
      if (constant) {
        const double g = dist.sample(rng);
        for (int t = 0; t < t_total; ++t)
          v[(static_cast<std::size_t>(t) * k + j) * k + i] = g;
      } else {
        for (int t = 0; t < t_total; ++t)
          v[(static_cast<std::size_t>(t) * k + j) * k + i] = dist.sample(rng);
      }
    }
  }
  return v;
}

}  // namespace

ChannelRealization sample_time_varying(int k, int t_total,
                                       const GainDistribution& dist,
                                       std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (t_total < 1) throw std::invalid_argument("t_total must be >= 1");
  return ChannelRealization(k, t_total, false, seed, dist,
                            sample_hop(k, t_total, dist, seed, 0, false),
                            sample_hop(k, t_total, dist, seed, 1, false));
}

ChannelRealization sample_constant(int k, const GainDistribution& dist,
                                   std::uint64_t seed, int t_total) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (t_total < 1) throw std::invalid_argument("t_total must be >= 1");
  return ChannelRealization(k, t_total, true, seed, dist,
                            sample_hop(k, t_total, dist, seed, 0, true),
                            sample_hop(k, t_total, dist, seed, 1, true));
}

nlohmann::json realization_to_json(const ChannelRealization& real) {
  nlohmann::json j;
  j["k"] = real.k();
  j["t_total"] = real.t_total();
  j["constant"] = real.constant();
  j["seed"] = real.seed();
  j["dist"] = real.dist().describe();
  j["first_hop"] = real.raw(Hop::first);
  j["second_hop"] = real.raw(Hop::second);
  return j;
}

ChannelRealization realization_from_json(const nlohmann::json& j) {
  GainDistribution dist = default_gain_distribution();
  const std::string d = j.value("dist", "uniform:-2.0:2.0");
  if (d == "normal") {
    dist = GainDistribution::standard_normal();
  } else if (d.rfind("uniform:", 0) == 0) {
    const auto rest = d.substr(8);
    const auto sep = rest.find(':');
    dist = GainDistribution::uniform(std::stod(rest.substr(0, sep)),
                                     std::stod(rest.substr(sep + 1)));
  }
  return ChannelRealization(
      j.at("k").get<int>(), j.at("t_total").get<int>(),
      j.at("constant").get<bool>(), j.at("seed").get<std::uint64_t>(), dist,
      j.at("first_hop").get<std::vector<double>>(),
      j.at("second_hop").get<std::vector<double>>());
}

}  // namespace netdiag
