#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "backhaul/propagation.hpp"
#include "backhaul/scenario.hpp"

namespace testing {

inline constexpr double kNoiseW = 1e-12;  // -90 dBm

// Hand-sized scenario: anchors on the left edge, demanding stations on the
// right; positions do not matter when gains are set by hand.
inline backhaul::Scenario tiny_scenario(int anchors, int demanding, int n1, int n2, double price_mmw = 0.1,
                                        double price_sub6 = 10.0, double budget = 60.0,
                                        double demand_bps = 100e6) {
  backhaul::Scenario s;
  int id = 0;
  for (int a = 0; a < anchors; ++a) {
    s.stations.push_back({id++, backhaul::Role::Anchor, {0.0, 10.0 * a}});
  }
  for (int d = 0; d < demanding; ++d) {
    s.stations.push_back({id++, backhaul::Role::Demanding, {100.0, 10.0 * d}});
  }
  s.mmw = {backhaul::BandKind::MmWave, 73e9, n1, 4.86e6};
  s.sub6 = {backhaul::BandKind::Sub6, 5.8e9, n2, 480e3};
  s.prices.per_anchor.assign(static_cast<std::size_t>(anchors), {price_mmw, price_sub6});
  s.budget.assign(static_cast<std::size_t>(demanding), budget);
  s.demand_bps.assign(static_cast<std::size_t>(demanding), demand_bps);
  s.tx_power_w = 1.0;
  s.noise_power_dbm = -90.0;
  s.sub6_params.ref_loss_db = 47.7;
  s.area_side_m = 200.0;
  s.seed = 7;
  return s;
}

inline backhaul::ChannelRealization zero_channels(const backhaul::Scenario& s) {
  return backhaul::ChannelRealization(s.num_anchors(), s.mmw.num_brbs, s.sub6.num_brbs, s.num_demanding());
}

// Gain that yields SNR `gamma` at 1 W over -90 dBm noise.
inline double gain_for_snr(double gamma) { return gamma * kNoiseW; }

inline double rate_of(double bandwidth_hz, double gamma) { return bandwidth_hz * std::log2(1.0 + gamma); }

inline std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "backhaul_unit_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace testing
