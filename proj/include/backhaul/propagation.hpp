#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "backhaul/rng.hpp"
#include "backhaul/scenario.hpp"

namespace backhaul {

/// Sampled linear power gains for every (anchor, BRB, demanding) triple of
/// one trial. BRB index n runs over both carriers: [0, N1) are mmW and
/// [N1, N1 + N2) are sub-6. mmW gains of one link are shared by all its
/// mmW BRBs; sub-6 gains carry per-BRB fading.
class ChannelRealization {
public:
  ChannelRealization() = default;
  ChannelRealization(int num_anchors, int num_mmw_brbs, int num_sub6_brbs, int num_demanding);

  int num_anchors() const { return num_anchors_; }
  int num_mmw_brbs() const { return num_mmw_; }
  int num_brbs() const { return num_mmw_ + num_sub6_; }
  int num_demanding() const { return num_demanding_; }
  bool is_mmw(int n) const { return n < num_mmw_; }

  double gain(int k1, int n, int k2) const { return gains_[index(k1, n, k2)]; }
  void set_gain(int k1, int n, int k2, double g) { gains_[index(k1, n, k2)] = g; }

  bool los(int k1, int k2) const { return los_[static_cast<std::size_t>(k1 * num_demanding_ + k2)] != 0; }
  void set_los(int k1, int k2, bool v) { los_[static_cast<std::size_t>(k1 * num_demanding_ + k2)] = v; }

  bool operator==(const ChannelRealization&) const = default;

private:
  std::size_t index(int k1, int n, int k2) const {
    return (static_cast<std::size_t>(k1) * static_cast<std::size_t>(num_brbs()) +
            static_cast<std::size_t>(n)) * static_cast<std::size_t>(num_demanding_) +
           static_cast<std::size_t>(k2);
  }

  int num_anchors_ = 0;
  int num_mmw_ = 0;
  int num_sub6_ = 0;
  int num_demanding_ = 0;
  std::vector<double> gains_;
  std::vector<unsigned char> los_;
};

/// Close-in mmW path loss in dB: beta + alpha * 10 log10(d) + chi.
/// Throws DomainError for d < 1 m.
double mmw_pathloss_db(double distance_m, double alpha, double beta_db, double chi_db);

/// One zero-mean Gaussian shadowing draw with standard deviation xi_db.
double sample_mmw_shadowing(double xi_db, Rng& rng);

/// Unit-mean squared Rayleigh envelope (exponential with mean 1).
double sample_rayleigh_power(Rng& rng);

/// Linear sub-6 gain: fade * 10^(-(ref_loss + 10 * exponent * log10(d)) / 10).
double sub6_gain(double distance_m, double exponent, double ref_loss_db, double fade);

/// Noise-limited mmW SNR.
double snr_mmw(double tx_power_w, double gain, double noise_w);

/// Sub-6 SINR on BRB n of the serving anchor, with every other anchor
/// transmitting on the same BRB. Throws WrongBandError for mmW BRBs.
double sinr_sub6(int k1, int n, int k2, std::span<const double> tx_power_w,
                 const ChannelRealization& ch, double noise_w);

/// Shannon rate omega * log2(1 + gamma) in bit/s.
double brb_rate(double bandwidth_hz, double gamma);

double distance_m(const Position& a, const Position& b);

/// Draws shadowing, blockage and fading for every link of the scenario.
/// Distances below 1 m are clamped to the 1 m model reference.
ChannelRealization realize_channels(const Scenario& s, Rng& rng);

/// Per-(anchor, BRB, demanding) SNR/SINR and Shannon rate, precomputed
/// once per realization.
class LinkTable {
public:
  LinkTable(const Scenario& s, const ChannelRealization& ch);

  int num_anchors() const { return num_anchors_; }
  int num_brbs() const { return num_brbs_; }
  int num_demanding() const { return num_demanding_; }

  double gamma(int k1, int n, int k2) const { return gamma_[index(k1, n, k2)]; }
  double rate(int k1, int n, int k2) const { return rate_[index(k1, n, k2)]; }

private:
  std::size_t index(int k1, int n, int k2) const {
    return (static_cast<std::size_t>(k1) * static_cast<std::size_t>(num_brbs_) +
            static_cast<std::size_t>(n)) * static_cast<std::size_t>(num_demanding_) +
           static_cast<std::size_t>(k2);
  }

  int num_anchors_;
  int num_brbs_;
  int num_demanding_;
  std::vector<double> gamma_;
  std::vector<double> rate_;
};

/// CSV dump with header `k1,n,k2,gain`, full precision.
void write_channel_csv(const ChannelRealization& ch, const std::filesystem::path& path);

}  // namespace backhaul
