#include "backhaul/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "backhaul/errors.hpp"
#include "backhaul/format.hpp"

namespace backhaul {

ChannelRealization::ChannelRealization(int num_anchors, int num_mmw_brbs, int num_sub6_brbs,
                                       int num_demanding)
    : num_anchors_(num_anchors),
      num_mmw_(num_mmw_brbs),
      num_sub6_(num_sub6_brbs),
      num_demanding_(num_demanding),
      gains_(static_cast<std::size_t>(num_anchors) *
                 static_cast<std::size_t>(num_mmw_brbs + num_sub6_brbs) *
                 static_cast<std::size_t>(num_demanding),
             0.0),
      los_(static_cast<std::size_t>(num_anchors) * static_cast<std::size_t>(num_demanding), 1) {}

double mmw_pathloss_db(double distance_m, double alpha, double beta_db, double chi_db) {
  if (!(distance_m >= 1.0)) {
    throw DomainError("mmW path loss model is defined for d >= 1 m");
  }
  return beta_db + alpha * 10.0 * std::log10(distance_m) + chi_db;
}

double sample_mmw_shadowing(double xi_db, Rng& rng) {
  if (xi_db == 0.0) return 0.0;
  std::normal_distribution<double> dist(0.0, xi_db);
  return dist(rng);
}

double sample_rayleigh_power(Rng& rng) {
  std::exponential_distribution<double> dist(1.0);
  return dist(rng);
}

double sub6_gain(double distance_m, double exponent, double ref_loss_db, double fade) {
  if (!(distance_m >= 1.0)) {
    throw DomainError("sub-6 path loss model is defined for d >= 1 m");
  }
  const double loss_db = ref_loss_db + 10.0 * exponent * std::log10(distance_m);
  return fade * std::pow(10.0, -loss_db / 10.0);
}

double snr_mmw(double tx_power_w, double gain, double noise_w) {
  return tx_power_w * gain / noise_w;
}

double sinr_sub6(int k1, int n, int k2, std::span<const double> tx_power_w,
                 const ChannelRealization& ch, double noise_w) {
  if (ch.is_mmw(n)) {
    throw WrongBandError("BRB " + std::to_string(n) + " belongs to the mmW band");
  }
  double interference = 0.0;
  for (int j = 0; j < ch.num_anchors(); ++j) {
    if (j == k1) continue;
    interference += tx_power_w[static_cast<std::size_t>(j)] * ch.gain(j, n, k2);
  }
  return tx_power_w[static_cast<std::size_t>(k1)] * ch.gain(k1, n, k2) / (interference + noise_w);
}

double brb_rate(double bandwidth_hz, double gamma) {
  return bandwidth_hz * std::log2(1.0 + gamma);
}

double distance_m(const Position& a, const Position& b) {
  return std::hypot(a.x_m - b.x_m, a.y_m - b.y_m);
}

ChannelRealization realize_channels(const Scenario& s, Rng& rng) {
  const auto anchors = s.anchor_positions();
  const auto demanding = s.demanding_positions();
  const int k1n = static_cast<int>(anchors.size());
  const int k2n = static_cast<int>(demanding.size());
  const int n1 = s.mmw.num_brbs;
  const int n2 = s.sub6.num_brbs;
  ChannelRealization ch(k1n, n1, n2, k2n);

  const auto& mp = s.mmw_params;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int a = 0; a < k1n; ++a) {
    for (int d = 0; d < k2n; ++d) {
      const double dist = std::max(1.0, distance_m(anchors[static_cast<std::size_t>(a)],
                                                   demanding[static_cast<std::size_t>(d)]));
      // Blockage and shadowing are always drawn so the stream layout does
      // not depend on the blockage probability.
      const bool blocked = unit(rng) < mp.blockage_probability;
      const double chi = sample_mmw_shadowing(mp.sigma_db, rng);
      ch.set_los(a, d, !blocked);
      const double g =
          blocked ? 0.0 : std::pow(10.0, -mmw_pathloss_db(dist, mp.alpha, mp.beta_db, chi) / 10.0);
      for (int n = 0; n < n1; ++n) ch.set_gain(a, n, d, g);
    }
  }

  const auto& sp = s.sub6_params;
  for (int a = 0; a < k1n; ++a) {
    for (int n = n1; n < n1 + n2; ++n) {
      for (int d = 0; d < k2n; ++d) {
        const double dist = std::max(1.0, distance_m(anchors[static_cast<std::size_t>(a)],
                                                     demanding[static_cast<std::size_t>(d)]));
        const double fade = sample_rayleigh_power(rng);
        ch.set_gain(a, n, d, sub6_gain(dist, sp.pathloss_exponent, sp.ref_loss_db, fade));
      }
    }
  }
  return ch;
}

LinkTable::LinkTable(const Scenario& s, const ChannelRealization& ch)
    : num_anchors_(ch.num_anchors()),
      num_brbs_(ch.num_brbs()),
      num_demanding_(ch.num_demanding()),
      gamma_(static_cast<std::size_t>(num_anchors_) * static_cast<std::size_t>(num_brbs_) *
             static_cast<std::size_t>(num_demanding_)),
      rate_(gamma_.size()) {
  const std::vector<double> power(static_cast<std::size_t>(num_anchors_), s.tx_power_w);
  const double noise = s.noise_power_w();
  for (int a = 0; a < num_anchors_; ++a) {
    for (int n = 0; n < num_brbs_; ++n) {
      const bool mmw = ch.is_mmw(n);
      const double omega = mmw ? s.mmw.brb_bandwidth_hz : s.sub6.brb_bandwidth_hz;
      for (int d = 0; d < num_demanding_; ++d) {
        const double g = mmw ? snr_mmw(s.tx_power_w, ch.gain(a, n, d), noise)
                             : sinr_sub6(a, n, d, power, ch, noise);
        gamma_[index(a, n, d)] = g;
        rate_[index(a, n, d)] = brb_rate(omega, g);
      }
    }
  }
}

void write_channel_csv(const ChannelRealization& ch, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "k1,n,k2,gain\n";
  for (int a = 0; a < ch.num_anchors(); ++a)
    for (int n = 0; n < ch.num_brbs(); ++n)
      for (int d = 0; d < ch.num_demanding(); ++d)
        out << a << ',' << n << ',' << d << ',' << format_double(ch.gain(a, n, d)) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace backhaul
