#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "backhaul/matching.hpp"
#include "backhaul/propagation.hpp"
#include "backhaul/scenario.hpp"

namespace backhaul {

inline constexpr int kOracleMaxBrbs = 8;
inline constexpr int kOracleMaxDemanding = 3;

struct OracleSolution {
  Matching assignment;
  double total_cost = 0.0;
  bool feasible = false;
  std::int64_t enumerated = 0;
  std::int64_t feasible_count = 0;
  /// A second pass over every feasible assignment found none cheaper.
  bool dominance_verified = false;
};

/// Minimum-cost assignment meeting every demand within every budget, found
/// by enumerating each BRB's choice of {unassigned, station 0, 1, ...} in
/// lexicographic order (first BRB most significant). Ties keep the first
/// assignment found. Throws SizeError beyond kOracleMaxBrbs BRBs or
/// kOracleMaxDemanding stations.
OracleSolution brute_force_min_cost(const Scenario& s, const LinkTable& links);
OracleSolution brute_force_min_cost(const Scenario& s, const ChannelRealization& ch);

/// Satisfaction of each constraint family of the global program. Quota one
/// per BRB implies the per-anchor total, so that family can never bind.
struct ConstraintReport {
  bool rate_ok = true;          // rate >= demand for every station
  bool budget_ok = true;        // cost <= budget for every station
  bool anchor_total_ok = true;  // at most N BRBs used per anchor
  bool quota_ok = true;         // each BRB held at most once
  bool integrality_ok = true;   // each (station, BRB) indicator is 0 or 1
  std::vector<double> rate_slack_bps;  // rate - demand
  std::vector<double> budget_slack;    // budget - cost
  std::vector<int> anchor_load;
  std::vector<std::string> violations;

  bool allocation_ok() const { return budget_ok && anchor_total_ok && quota_ok && integrality_ok; }
};

ConstraintReport check_constraints(const Matching& m, const Scenario& s, const LinkTable& links);
ConstraintReport check_constraints(const Matching& m, const Scenario& s, const ChannelRealization& ch);

/// Small random instance (<= 2 anchors, <= 3 demanding stations, <= 6 BRBs)
/// with demands and budgets drawn relative to its realized rates and prices.
struct MicroInstance {
  Scenario scenario;
  ChannelRealization channels;
};
MicroInstance make_micro_instance(std::uint64_t seed);

struct OracleComparison {
  std::uint64_t instance = 0;
  bool feasible = false;
  double oracle_cost = 0.0;
  double matching_cost = 0.0;
  double gap = 0.0;  // matching - oracle, meaningful when both meet demand
  bool matching_meets_demand = false;
  bool matching_allocation_ok = false;
  bool dominance_verified = false;
};

OracleComparison compare_with_oracle(std::uint64_t instance, const MicroInstance& mi, double zeta);

/// Header `instance,feasible,oracle_cost,matching_cost,gap,...`; costs of
/// infeasible instances and gaps without full demand are left empty.
void write_oracle_csv(const std::vector<OracleComparison>& rows, const std::filesystem::path& path);

}  // namespace backhaul
