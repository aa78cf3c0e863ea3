#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace backhaul {

enum class Role { Anchor, Demanding };
enum class BandKind { MmWave, Sub6 };

struct Position {
  double x_m = 0.0;
  double y_m = 0.0;
  bool operator==(const Position&) const = default;
};

struct BaseStation {
  int id = 0;
  Role role = Role::Anchor;
  Position position;
  bool operator==(const BaseStation&) const = default;
};

struct Band {
  BandKind kind = BandKind::MmWave;
  double center_frequency_hz = 0.0;
  int num_brbs = 0;
  double brb_bandwidth_hz = 0.0;
  bool operator==(const Band&) const = default;
};

/// Per-anchor BRB prices, indexed [anchor][band] with band 0 = mmW, 1 = sub-6.
struct PriceSchedule {
  std::vector<std::array<double, 2>> per_anchor;

  double price(int anchor, BandKind band) const {
    return per_anchor.at(static_cast<std::size_t>(anchor))[band == BandKind::MmWave ? 0 : 1];
  }
  bool operator==(const PriceSchedule&) const = default;
};

struct MmwParams {
  double alpha = 2.0;
  double beta_db = 70.0;
  double sigma_db = 4.1;
  /// Independent per-link probability that a mmW link is blocked (non-LOS).
  double blockage_probability = 0.0;
  bool operator==(const MmwParams&) const = default;
};

struct Sub6Params {
  double pathloss_exponent = 3.0;
  double ref_loss_db = 0.0;  // loss at 1 m
  bool operator==(const Sub6Params&) const = default;
};

/// One static network instance. Anchors and demanding stations are indexed
/// by their order of appearance in `stations`; `prices` follows anchor order
/// and `budget`/`demand_bps` follow demanding order.
struct Scenario {
  std::vector<BaseStation> stations;
  Band mmw{BandKind::MmWave};
  Band sub6{BandKind::Sub6};
  PriceSchedule prices;
  std::vector<double> budget;
  std::vector<double> demand_bps;
  double tx_power_w = 1.0;
  double noise_power_dbm = -90.0;  // per BRB
  MmwParams mmw_params;
  Sub6Params sub6_params;
  double area_side_m = 2000.0;
  std::uint64_t seed = 0;

  bool operator==(const Scenario&) const = default;

  int num_anchors() const;
  int num_demanding() const;
  int num_brbs_per_anchor() const { return mmw.num_brbs + sub6.num_brbs; }
  double noise_power_w() const;

  std::vector<Position> anchor_positions() const;
  std::vector<Position> demanding_positions() const;
};

/// Knobs for random instance generation. Defaults reproduce the reference
/// small-cell setup (10 stations, 2 anchors, 192 + 100 BRBs).
struct GenerationConfig {
  int num_stations = 10;
  int num_anchors = 2;
  int n1 = 192;
  int n2 = 100;
  double mmw_brb_bandwidth_hz = 4.86e6;
  double sub6_brb_bandwidth_hz = 480e3;
  double mmw_center_frequency_hz = 73e9;
  double sub6_center_frequency_hz = 5.8e9;
  double tx_power_w = 1.0;
  double noise_power_dbm = -90.0;
  double demand_bps = 100e6;
  double budget = 60.0;
  double price_mmw = 0.1;
  double price_sub6 = 10.0;
  double mmw_alpha = 2.0;
  double mmw_beta_db = 70.0;
  double mmw_sigma_db = 4.1;
  double mmw_blockage_probability = 0.0;
  double sub6_pathloss_exponent = 3.0;
  /// Unset: free-space loss at 1 m for the sub-6 carrier.
  std::optional<double> sub6_ref_loss_db;
  double area_side_m = 2000.0;

  bool operator==(const GenerationConfig&) const = default;
};

/// Free-space (Friis) path loss at distance 1 m, in dB.
double free_space_loss_1m_db(double frequency_hz);

/// Uniform placement over the square; the first `num_anchors` stations are
/// anchors. Throws InvalidConfigError when num_anchors >= num_stations.
Scenario generate_scenario(const GenerationConfig& cfg, std::uint64_t seed);

/// Lists violated invariants; empty means valid.
std::vector<std::string> validate_scenario(const Scenario& s);

nlohmann::json scenario_to_json(const Scenario& s);
/// Strict: missing or unknown fields raise ParseError naming the field.
Scenario scenario_from_json(const nlohmann::json& j);

void save_scenario(const Scenario& s, const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::json generation_config_to_json(const GenerationConfig& cfg);
GenerationConfig generation_config_from_json(const nlohmann::json& j);

}  // namespace backhaul
