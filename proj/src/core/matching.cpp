#include "backhaul/matching.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "backhaul/errors.hpp"
#include "backhaul/format.hpp"

namespace backhaul {

BrbCatalog::BrbCatalog(const Scenario& s) : per_anchor_(s.num_brbs_per_anchor()) {
  const int anchors = s.num_anchors();
  brbs_.reserve(static_cast<std::size_t>(anchors * per_anchor_));
  for (int a = 0; a < anchors; ++a) {
    for (int n = 0; n < s.mmw.num_brbs; ++n) {
      brbs_.push_back(Brb{a, BandKind::MmWave, n, s.mmw.brb_bandwidth_hz,
                          s.prices.price(a, BandKind::MmWave)});
    }
    for (int n = 0; n < s.sub6.num_brbs; ++n) {
      brbs_.push_back(Brb{a, BandKind::Sub6, n, s.sub6.brb_bandwidth_hz,
                          s.prices.price(a, BandKind::Sub6)});
    }
  }
}

double BrbCatalog::price_sum(std::span<const BrbId> ids) const {
  double total = 0.0;
  for (BrbId id : ids) total += (*this)[id].price;
  return total;
}

bool BrbCatalog::fits_budget(std::span<const BrbId> assigned, BrbId added, double budget,
                             std::optional<BrbId> removed) const {
  // Fast path when the answer is far from the boundary; otherwise sum in
  // canonical order so the verdict matches price_sum of the final set.
  double approx = 0.0;
  for (BrbId id : assigned) approx += (*this)[id].price;
  if (removed) approx -= (*this)[*removed].price;
  approx += (*this)[added].price;
  const double margin = 1e-9 * std::max(1.0, std::abs(budget));
  if (approx < budget - margin) return true;
  if (approx > budget + margin) return false;

  double exact = 0.0;
  bool added_done = false;
  for (BrbId id : assigned) {
    if (removed && id == *removed) continue;
    if (!added_done && added < id) {
      exact += (*this)[added].price;
      added_done = true;
    }
    exact += (*this)[id].price;
  }
  if (!added_done) exact += (*this)[added].price;
  return exact <= budget;
}

Matching Matching::empty(int num_demanding, int num_brbs) {
  Matching m;
  m.assigned.resize(static_cast<std::size_t>(num_demanding));
  m.owner_of.resize(static_cast<std::size_t>(num_brbs));
  m.rate_bps.assign(static_cast<std::size_t>(num_demanding), 0.0);
  m.cost.assign(static_cast<std::size_t>(num_demanding), 0.0);
  return m;
}

void Matching::assign(BrbId b, int k2) {
  auto& list = assigned[static_cast<std::size_t>(k2)];
  list.insert(std::lower_bound(list.begin(), list.end(), b), b);
  owner_of[static_cast<std::size_t>(b)] = k2;
}

void Matching::release(BrbId b) {
  auto& holder = owner_of[static_cast<std::size_t>(b)];
  if (!holder) return;
  auto& list = assigned[static_cast<std::size_t>(*holder)];
  list.erase(std::lower_bound(list.begin(), list.end(), b));
  holder.reset();
}

double dbs_utility(const Brb& brb, double gamma, double zeta) {
  return brb.bandwidth_hz * std::log2(1.0 + gamma) - zeta * brb.price;
}

double brb_utility(double gamma, double bandwidth_hz) {
  return bandwidth_hz * std::log2(1.0 + gamma);
}

bool dbs_prefers(const Brb& a, double utility_a, const Brb& b, double utility_b) {
  if (utility_a != utility_b) return utility_a > utility_b;
  if (a.price != b.price) return a.price < b.price;
  if (a.band != b.band) return a.band == BandKind::MmWave;
  if (a.owner != b.owner) return a.owner < b.owner;
  return a.index < b.index;
}

namespace {

double link_gamma(const LinkTable& links, const BrbCatalog& catalog, BrbId b, int k2) {
  return links.gamma(catalog[b].owner, catalog.channel_index(b), k2);
}

double link_rate(const LinkTable& links, const BrbCatalog& catalog, BrbId b, int k2) {
  return links.rate(catalog[b].owner, catalog.channel_index(b), k2);
}

// BRBs in a station's preference order, consumed as the station applies.
struct PreferenceList {
  std::vector<BrbId> order;
  std::vector<char> applied;  // indexed by position in `order`
  std::size_t head = 0;       // first position not yet applied to
};

}  // namespace

Matching run_matching(const Scenario& s, const LinkTable& links, double zeta,
                      const RoundObserver& observer) {
  const BrbCatalog catalog(s);
  const int num_brbs = catalog.size();
  const int num_dbs = links.num_demanding();
  Matching m = Matching::empty(num_dbs, num_brbs);

  std::vector<PreferenceList> prefs(static_cast<std::size_t>(num_dbs));
  std::vector<double> utility(static_cast<std::size_t>(num_brbs));
  for (int k2 = 0; k2 < num_dbs; ++k2) {
    for (BrbId b = 0; b < num_brbs; ++b) {
      utility[static_cast<std::size_t>(b)] = dbs_utility(catalog[b], link_gamma(links, catalog, b, k2), zeta);
    }
    auto& p = prefs[static_cast<std::size_t>(k2)];
    p.order.resize(static_cast<std::size_t>(num_brbs));
    std::iota(p.order.begin(), p.order.end(), 0);
    std::sort(p.order.begin(), p.order.end(), [&](BrbId a, BrbId b) {
      return dbs_prefers(catalog[a], utility[static_cast<std::size_t>(a)], catalog[b],
                         utility[static_cast<std::size_t>(b)]);
    });
    p.applied.assign(p.order.size(), 0);
  }

  // BRB-side utility of the current holder, for each BRB.
  std::vector<double> holder_utility(static_cast<std::size_t>(num_brbs),
                                     -std::numeric_limits<double>::infinity());
  std::vector<std::pair<BrbId, int>> proposals;

  while (true) {
    // Stage 1: applications.
    proposals.clear();
    for (int k2 = 0; k2 < num_dbs; ++k2) {
      const auto k = static_cast<std::size_t>(k2);
      if (!(m.rate_bps[k] < s.demand_bps[k])) continue;
      auto& p = prefs[k];
      for (std::size_t i = p.head; i < p.order.size(); ++i) {
        if (p.applied[i]) continue;
        const BrbId b = p.order[i];
        if (!catalog.fits_budget(m.assigned[k], b, s.budget[k])) continue;
        p.applied[i] = 1;
        while (p.head < p.order.size() && p.applied[p.head]) ++p.head;
        proposals.emplace_back(b, k2);
        break;
      }
    }
    if (proposals.empty()) break;
    ++m.rounds;
    m.proposals += static_cast<std::int64_t>(proposals.size());

    // Stage 2: each BRB keeps its best applicant, holder included.
    std::sort(proposals.begin(), proposals.end());
    std::vector<char> touched(static_cast<std::size_t>(num_dbs), 0);
    for (std::size_t i = 0; i < proposals.size();) {
      const BrbId b = proposals[i].first;
      const auto bi = static_cast<std::size_t>(b);
      const std::optional<int> holder = m.owner_of[bi];
      std::optional<int> best = holder;
      double best_u = holder_utility[bi];
      for (; i < proposals.size() && proposals[i].first == b; ++i) {
        const int k2 = proposals[i].second;
        const double u = brb_utility(link_gamma(links, catalog, b, k2), catalog[b].bandwidth_hz);
        if (!best || u > best_u) {
          best = k2;
          best_u = u;
        }
      }
      if (best == holder) continue;
      if (holder) {
        m.rate_bps[static_cast<std::size_t>(*holder)] -= link_rate(links, catalog, b, *holder);
        m.release(b);
        touched[static_cast<std::size_t>(*holder)] = 1;
      }
      m.assign(b, *best);
      m.rate_bps[static_cast<std::size_t>(*best)] += link_rate(links, catalog, b, *best);
      touched[static_cast<std::size_t>(*best)] = 1;
      holder_utility[bi] = best_u;
    }
    for (int k2 = 0; k2 < num_dbs; ++k2) {
      const auto k = static_cast<std::size_t>(k2);
      if (touched[k]) m.cost[k] = catalog.price_sum(m.assigned[k]);
    }
    if (observer) observer(m);
  }
  return m;
}

Matching run_matching(const Scenario& s, const ChannelRealization& ch, double zeta) {
  return run_matching(s, LinkTable(s, ch), zeta);
}

void check_consistency(const Matching& m, int num_brbs) {
  if (static_cast<int>(m.owner_of.size()) != num_brbs) {
    throw ConsistencyError("owner_of has " + std::to_string(m.owner_of.size()) +
                           " entries for " + std::to_string(num_brbs) + " BRBs");
  }
  std::vector<int> seen(static_cast<std::size_t>(num_brbs), -1);
  for (std::size_t k2 = 0; k2 < m.assigned.size(); ++k2) {
    for (BrbId b : m.assigned[k2]) {
      if (b < 0 || b >= num_brbs) throw ConsistencyError("BRB id " + std::to_string(b) + " out of range");
      const auto bi = static_cast<std::size_t>(b);
      if (seen[bi] >= 0) {
        throw ConsistencyError("BRB " + std::to_string(b) + " is assigned to more than one station");
      }
      seen[bi] = static_cast<int>(k2);
      if (m.owner_of[bi] != static_cast<int>(k2)) {
        throw ConsistencyError("BRB " + std::to_string(b) + " is in the set of station " +
                               std::to_string(k2) + " but owner_of disagrees");
      }
    }
  }
  for (std::size_t b = 0; b < m.owner_of.size(); ++b) {
    if (m.owner_of[b] && seen[b] != *m.owner_of[b]) {
      throw ConsistencyError("owner_of names station " + std::to_string(*m.owner_of[b]) +
                             " for BRB " + std::to_string(b) + " outside its set");
    }
  }
}

std::vector<BlockingPair> find_blocking_pairs(const Matching& m, const Scenario& s,
                                              const LinkTable& links, double zeta) {
  const BrbCatalog catalog(s);
  const int num_brbs = catalog.size();
  check_consistency(m, num_brbs);

  std::vector<BlockingPair> out;
  const int num_dbs = static_cast<int>(m.assigned.size());
  std::vector<double> held_utility;
  for (int k2 = 0; k2 < num_dbs; ++k2) {
    const auto k = static_cast<std::size_t>(k2);
    const auto& held = m.assigned[k];
    held_utility.clear();
    for (BrbId h : held) held_utility.push_back(dbs_utility(catalog[h], link_gamma(links, catalog, h, k2), zeta));
    const bool below_demand = m.rate_bps[k] < s.demand_bps[k];

    for (BrbId b = 0; b < num_brbs; ++b) {
      const auto& owner = m.owner_of[static_cast<std::size_t>(b)];
      if (owner == k2) continue;
      const double omega = catalog[b].bandwidth_hz;
      const double gamma = link_gamma(links, catalog, b, k2);
      if (owner) {
        const double incumbent = brb_utility(link_gamma(links, catalog, b, *owner), omega);
        if (!(brb_utility(gamma, omega) > incumbent)) continue;
      }

      bool wants = below_demand && catalog.fits_budget(held, b, s.budget[k]);
      if (!wants) {
        const double v = dbs_utility(catalog[b], gamma, zeta);
        for (std::size_t i = 0; i < held.size() && !wants; ++i) {
          wants = v > held_utility[i] && catalog.fits_budget(held, b, s.budget[k], held[i]);
        }
      }
      if (wants) out.push_back(BlockingPair{k2, b});
    }
  }
  return out;
}

std::vector<BlockingPair> find_blocking_pairs(const Matching& m, const Scenario& s,
                                              const ChannelRealization& ch, double zeta) {
  return find_blocking_pairs(m, s, LinkTable(s, ch), zeta);
}

double assigned_rate(std::span<const BrbId> ids, int k2, const BrbCatalog& catalog,
                     const LinkTable& links) {
  double total = 0.0;
  for (BrbId b : ids) total += link_rate(links, catalog, b, k2);
  return total;
}

void write_matching_csv(const Matching& m, const Scenario& s, const LinkTable& links,
                        const std::filesystem::path& path) {
  const BrbCatalog catalog(s);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "k2,k1,band,n,gamma,rate_bps,price\n";
  for (std::size_t k2 = 0; k2 < m.assigned.size(); ++k2) {
    for (BrbId b : m.assigned[k2]) {
      const Brb& brb = catalog[b];
      const int k = static_cast<int>(k2);
      out << k2 << ',' << brb.owner << ',' << (brb.band == BandKind::MmWave ? "mmw" : "sub6") << ','
          << brb.index << ',' << format_double(link_gamma(links, catalog, b, k)) << ','
          << format_double(link_rate(links, catalog, b, k)) << ',' << format_double(brb.price) << '\n';
    }
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace backhaul
