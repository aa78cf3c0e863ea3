#include "backhaul/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "backhaul/errors.hpp"
#include "backhaul/format.hpp"
#include "backhaul/rng.hpp"

namespace backhaul {

namespace {

// Decodes enumeration index `code` into per-BRB choices, BRB 0 most
// significant; 0 = unassigned, j + 1 = station j.
void decode(std::int64_t code, int base, std::vector<int>& choice) {
  for (std::size_t i = choice.size(); i-- > 0;) {
    choice[i] = static_cast<int>(code % base);
    code /= base;
  }
}

}  // namespace

OracleSolution brute_force_min_cost(const Scenario& s, const LinkTable& links) {
  const BrbCatalog catalog(s);
  const int num_brbs = catalog.size();
  const int num_dbs = links.num_demanding();
  if (num_brbs > kOracleMaxBrbs || num_dbs > kOracleMaxDemanding) {
    throw SizeError("exhaustive search supports at most " + std::to_string(kOracleMaxBrbs) +
                    " BRBs and " + std::to_string(kOracleMaxDemanding) +
                    " demanding stations (got " + std::to_string(num_brbs) + " and " +
                    std::to_string(num_dbs) + ")");
  }

  const int base = num_dbs + 1;
  std::int64_t total = 1;
  for (int i = 0; i < num_brbs; ++i) total *= base;

  std::vector<int> choice(static_cast<std::size_t>(num_brbs));
  std::vector<double> rate(static_cast<std::size_t>(num_dbs));
  std::vector<double> cost(static_cast<std::size_t>(num_dbs));

  auto evaluate = [&](std::int64_t code) -> std::optional<double> {
    decode(code, base, choice);
    std::fill(rate.begin(), rate.end(), 0.0);
    std::fill(cost.begin(), cost.end(), 0.0);
    for (BrbId b = 0; b < num_brbs; ++b) {
      const int c = choice[static_cast<std::size_t>(b)];
      if (c == 0) continue;
      const auto k = static_cast<std::size_t>(c - 1);
      rate[k] += links.rate(catalog[b].owner, catalog.channel_index(b), c - 1);
      cost[k] += catalog[b].price;
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < rate.size(); ++k) {
      if (!(rate[k] >= s.demand_bps[k]) || !(cost[k] <= s.budget[k])) return std::nullopt;
      sum += cost[k];
    }
    return sum;
  };

  OracleSolution out;
  std::int64_t best_code = -1;
  for (std::int64_t code = 0; code < total; ++code) {
    ++out.enumerated;
    const auto c = evaluate(code);
    if (!c) continue;
    ++out.feasible_count;
    if (best_code < 0 || *c < out.total_cost) {
      best_code = code;
      out.total_cost = *c;
    }
  }

  out.assignment = Matching::empty(num_dbs, num_brbs);
  if (best_code < 0) {
    out.dominance_verified = true;  // nothing feasible to undercut
    return out;
  }
  out.feasible = true;
  decode(best_code, base, choice);
  for (BrbId b = 0; b < num_brbs; ++b) {
    const int c = choice[static_cast<std::size_t>(b)];
    if (c == 0) continue;
    out.assignment.assign(b, c - 1);
    out.assignment.rate_bps[static_cast<std::size_t>(c - 1)] +=
        links.rate(catalog[b].owner, catalog.channel_index(b), c - 1);
  }
  for (std::size_t k = 0; k < out.assignment.assigned.size(); ++k) {
    out.assignment.cost[k] = catalog.price_sum(out.assignment.assigned[k]);
  }

  // Re-price every feasible point by summing BRB prices directly.
  out.dominance_verified = true;
  for (std::int64_t code = 0; code < total; ++code) {
    if (!evaluate(code)) continue;
    double direct = 0.0;
    for (BrbId b = 0; b < num_brbs; ++b) {
      if (choice[static_cast<std::size_t>(b)] != 0) direct += catalog[b].price;
    }
    if (direct < out.total_cost - 1e-9 * std::max(1.0, out.total_cost)) {
      out.dominance_verified = false;
      break;
    }
  }
  return out;
}

OracleSolution brute_force_min_cost(const Scenario& s, const ChannelRealization& ch) {
  return brute_force_min_cost(s, LinkTable(s, ch));
}

ConstraintReport check_constraints(const Matching& m, const Scenario& s, const LinkTable& links) {
  const BrbCatalog catalog(s);
  const int num_brbs = catalog.size();
  const int num_dbs = static_cast<int>(m.assigned.size());
  ConstraintReport r;

  std::vector<int> holders(static_cast<std::size_t>(num_brbs), 0);
  for (int k2 = 0; k2 < num_dbs; ++k2) {
    std::vector<BrbId> held = m.assigned[static_cast<std::size_t>(k2)];
    std::sort(held.begin(), held.end());
    for (std::size_t i = 0; i < held.size(); ++i) {
      const BrbId b = held[i];
      if (b < 0 || b >= num_brbs) {
        r.integrality_ok = false;
        r.violations.push_back("station " + std::to_string(k2) + " holds unknown BRB " + std::to_string(b));
        continue;
      }
      if (i > 0 && held[i - 1] == b) {
        r.integrality_ok = false;
        r.violations.push_back("station " + std::to_string(k2) + " holds BRB " + std::to_string(b) + " more than once");
        continue;
      }
      ++holders[static_cast<std::size_t>(b)];
    }
  }
  for (BrbId b = 0; b < num_brbs; ++b) {
    if (holders[static_cast<std::size_t>(b)] > 1) {
      r.quota_ok = false;
      r.violations.push_back("BRB " + std::to_string(b) + " is assigned to " +
                             std::to_string(holders[static_cast<std::size_t>(b)]) + " stations");
    }
  }

  r.anchor_load.assign(static_cast<std::size_t>(s.num_anchors()), 0);
  for (BrbId b = 0; b < num_brbs; ++b) {
    r.anchor_load[static_cast<std::size_t>(catalog[b].owner)] += holders[static_cast<std::size_t>(b)];
  }
  for (std::size_t a = 0; a < r.anchor_load.size(); ++a) {
    if (r.anchor_load[a] > s.num_brbs_per_anchor()) {
      r.anchor_total_ok = false;
      r.violations.push_back("anchor " + std::to_string(a) + " allocates more than N BRBs");
    }
  }

  for (int k2 = 0; k2 < num_dbs; ++k2) {
    const auto k = static_cast<std::size_t>(k2);
    std::vector<BrbId> valid;
    for (BrbId b : m.assigned[k]) {
      if (b >= 0 && b < num_brbs) valid.push_back(b);
    }
    std::sort(valid.begin(), valid.end());
    const double rate = assigned_rate(valid, k2, catalog, links);
    const double cost = catalog.price_sum(valid);
    r.rate_slack_bps.push_back(rate - s.demand_bps[k]);
    r.budget_slack.push_back(s.budget[k] - cost);
    if (!(rate >= s.demand_bps[k])) {
      r.rate_ok = false;
      r.violations.push_back("station " + std::to_string(k2) + " rate is below demand");
    }
    if (!(cost <= s.budget[k])) {
      r.budget_ok = false;
      r.violations.push_back("station " + std::to_string(k2) + " cost exceeds budget");
    }
  }
  return r;
}

ConstraintReport check_constraints(const Matching& m, const Scenario& s, const ChannelRealization& ch) {
  return check_constraints(m, s, LinkTable(s, ch));
}

MicroInstance make_micro_instance(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0));
  auto uniform_int = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  GenerationConfig cfg;
  cfg.num_anchors = uniform_int(1, 2);
  cfg.num_stations = cfg.num_anchors + uniform_int(1, 3);
  const int per_anchor = 6 / cfg.num_anchors;
  cfg.n1 = uniform_int(0, per_anchor);
  cfg.n2 = uniform_int(cfg.n1 == 0 ? 1 : 0, per_anchor - cfg.n1);
  cfg.area_side_m = 500.0;
  cfg.price_mmw = uniform(0.1, 1.0);
  cfg.price_sub6 = uniform(1.0, 10.0);

  MicroInstance mi;
  mi.scenario = generate_scenario(cfg, derive_seed(seed, 0, kPlacementStream));
  Rng channel_rng(derive_seed(seed, 0, kChannelStream));
  mi.channels = realize_channels(mi.scenario, channel_rng);

  const LinkTable links(mi.scenario, mi.channels);
  const BrbCatalog catalog(mi.scenario);
  const double all_prices = [&] {
    double t = 0.0;
    for (const auto& b : catalog.all()) t += b.price;
    return t;
  }();
  for (int k2 = 0; k2 < links.num_demanding(); ++k2) {
    double reachable = 0.0;
    for (BrbId b = 0; b < catalog.size(); ++b) reachable += links.rate(catalog[b].owner, catalog.channel_index(b), k2);
    const auto k = static_cast<std::size_t>(k2);
    mi.scenario.demand_bps[k] = reachable > 0.0 ? uniform(0.05, 0.9) * reachable : 1e6;
    mi.scenario.budget[k] = uniform(0.2, 1.0) * all_prices;
  }
  return mi;
}

OracleComparison compare_with_oracle(std::uint64_t instance, const MicroInstance& mi, double zeta) {
  const LinkTable links(mi.scenario, mi.channels);
  const Matching m = run_matching(mi.scenario, links, zeta);
  const OracleSolution oracle = brute_force_min_cost(mi.scenario, links);
  const ConstraintReport report = check_constraints(m, mi.scenario, links);

  OracleComparison c;
  c.instance = instance;
  c.feasible = oracle.feasible;
  c.oracle_cost = oracle.total_cost;
  for (double x : m.cost) c.matching_cost += x;
  c.matching_meets_demand = report.rate_ok;
  c.matching_allocation_ok = report.allocation_ok();
  c.dominance_verified = oracle.dominance_verified;
  if (c.feasible && c.matching_meets_demand) c.gap = c.matching_cost - c.oracle_cost;
  return c;
}

void write_oracle_csv(const std::vector<OracleComparison>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "instance,feasible,oracle_cost,matching_cost,gap,matching_meets_demand,matching_constraints_ok,"
         "oracle_dominance_ok\n";
  for (const auto& r : rows) {
    out << r.instance << ',' << (r.feasible ? 1 : 0) << ','
        << (r.feasible ? format_double(r.oracle_cost) : "") << ','
        << format_double(r.matching_cost) << ','
        << (r.feasible && r.matching_meets_demand ? format_double(r.gap) : "") << ','
        << (r.matching_meets_demand ? 1 : 0) << ',' << (r.matching_allocation_ok ? 1 : 0) << ','
        << (r.dominance_verified ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace backhaul
