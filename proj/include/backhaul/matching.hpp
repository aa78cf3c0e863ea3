#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "backhaul/propagation.hpp"
#include "backhaul/scenario.hpp"

namespace backhaul {

/// Dense id of a backhaul resource block: owner * (N1 + N2) + n, where n is
/// the carrier-spanning BRB index used by ChannelRealization. Ascending ids
/// therefore follow (owner, band, index) order.
using BrbId = int;

struct Brb {
  int owner = 0;  // anchor index
  BandKind band = BandKind::MmWave;
  int index = 0;  // within its band
  double bandwidth_hz = 0.0;
  double price = 0.0;
  bool operator==(const Brb&) const = default;
};

/// All BRBs offered by the anchors of one scenario.
class BrbCatalog {
public:
  explicit BrbCatalog(const Scenario& s);

  int size() const { return static_cast<int>(brbs_.size()); }
  const Brb& operator[](BrbId id) const { return brbs_[static_cast<std::size_t>(id)]; }
  std::span<const Brb> all() const { return brbs_; }

  /// BRB index across both carriers, as used by ChannelRealization.
  int channel_index(BrbId id) const { return id % per_anchor_; }
  BrbId id(int owner, int channel_index) const { return owner * per_anchor_ + channel_index; }

  /// Sum of prices of `ids` taken in ascending id order. Every budget
  /// comparison in the library goes through this so results are bit-exact.
  double price_sum(std::span<const BrbId> ids) const;

  /// price_sum(assigned - removed + added) <= budget, with `assigned` sorted.
  bool fits_budget(std::span<const BrbId> assigned, BrbId added, double budget,
                   std::optional<BrbId> removed = std::nullopt) const;

private:
  int per_anchor_;
  std::vector<Brb> brbs_;
};

/// Assignment of BRBs (quota one) to demanding stations (no fixed quota).
struct Matching {
  std::vector<std::vector<BrbId>> assigned;  // per demanding station, ascending
  std::vector<std::optional<int>> owner_of;  // per BRB
  std::vector<double> rate_bps;              // per demanding station
  std::vector<double> cost;                  // per demanding station
  int rounds = 0;
  std::int64_t proposals = 0;

  static Matching empty(int num_demanding, int num_brbs);

  void assign(BrbId b, int k2);
  void release(BrbId b);

  bool operator==(const Matching&) const = default;
};

/// Demanding-station utility: omega * log2(1 + gamma) - zeta * price.
double dbs_utility(const Brb& brb, double gamma, double zeta);

/// BRB-side utility of an applicant: its achievable rate on the BRB.
double brb_utility(double gamma, double bandwidth_hz);

/// Strict preference of a demanding station between two BRBs with known
/// utilities. Ties fall to lower price, then mmW, then lower (owner, index).
bool dbs_prefers(const Brb& a, double utility_a, const Brb& b, double utility_b);

/// Called after every completed round with the intermediate matching.
using RoundObserver = std::function<void(const Matching&)>;

/// Runs the distributed proposal/acceptance algorithm to convergence.
///
/// Each round, every active demanding station applies to its most preferred
/// affordable BRB it has not applied to before. Every BRB then keeps the best
/// of its current holder and the applicants, by achievable rate, releasing
/// the holder if beaten (ties keep the incumbent, then the lower station id).
/// A station is active while its rate is below demand and some unapplied BRB
/// still fits its remaining budget; displacement can re-activate it.
Matching run_matching(const Scenario& s, const LinkTable& links, double zeta,
                      const RoundObserver& observer = {});
Matching run_matching(const Scenario& s, const ChannelRealization& ch, double zeta);

struct BlockingPair {
  int k2 = 0;
  BrbId brb = 0;
  bool operator==(const BlockingPair&) const = default;
};

/// Throws ConsistencyError unless assigned/owner_of describe the same
/// quota-one assignment.
void check_consistency(const Matching& m, int num_brbs);

/// All pairs (k2, b), b not held by k2, where b strictly prefers k2 to its
/// holder (or is free) and k2 strictly gains: either by adding b while below
/// demand and within budget, or by swapping some held b' of lower utility
/// for b within budget.
std::vector<BlockingPair> find_blocking_pairs(const Matching& m, const Scenario& s,
                                              const LinkTable& links, double zeta);
std::vector<BlockingPair> find_blocking_pairs(const Matching& m, const Scenario& s,
                                              const ChannelRealization& ch, double zeta);

/// Rate of `ids` for station k2, recomputed from the link table.
double assigned_rate(std::span<const BrbId> ids, int k2, const BrbCatalog& catalog,
                     const LinkTable& links);

/// CSV with header `k2,k1,band,n,gamma,rate_bps,price`, one row per
/// assignment, sorted by (k2, k1, band, n).
void write_matching_csv(const Matching& m, const Scenario& s, const LinkTable& links,
                        const std::filesystem::path& path);

}  // namespace backhaul
