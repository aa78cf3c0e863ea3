#include "backhaul/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace backhaul {

Matching best_effort_allocate(const Scenario& s, const LinkTable& links) {
  const BrbCatalog catalog(s);
  const int num_dbs = links.num_demanding();
  Matching m = Matching::empty(num_dbs, catalog.size());

  struct Candidate {
    double rate;
    BrbId brb;
    int k2;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(catalog.size() * num_dbs));
  for (BrbId b = 0; b < catalog.size(); ++b) {
    for (int k2 = 0; k2 < num_dbs; ++k2) {
      const double r = links.rate(catalog[b].owner, catalog.channel_index(b), k2);
      if (r > 0.0) candidates.push_back({r, b, k2});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(b.rate, a.brb, a.k2) < std::tie(a.rate, b.brb, b.k2);
  });

  int unmet = 0;
  for (int k2 = 0; k2 < num_dbs; ++k2) unmet += m.rate_bps[static_cast<std::size_t>(k2)] < s.demand_bps[static_cast<std::size_t>(k2)];
  for (const auto& c : candidates) {
    if (unmet == 0) break;
    const auto k = static_cast<std::size_t>(c.k2);
    if (m.owner_of[static_cast<std::size_t>(c.brb)] || !(m.rate_bps[k] < s.demand_bps[k])) continue;
    m.assign(c.brb, c.k2);
    m.rate_bps[k] += c.rate;
    if (!(m.rate_bps[k] < s.demand_bps[k])) --unmet;
  }
  for (std::size_t k = 0; k < m.assigned.size(); ++k) m.cost[k] = catalog.price_sum(m.assigned[k]);
  return m;
}

Matching best_effort_allocate(const Scenario& s, const ChannelRealization& ch) {
  return best_effort_allocate(s, LinkTable(s, ch));
}

Matching random_allocate(const Scenario& s, const LinkTable& links, Rng& rng) {
  const BrbCatalog catalog(s);
  const int num_dbs = links.num_demanding();
  Matching m = Matching::empty(num_dbs, catalog.size());

  std::vector<BrbId> order(static_cast<std::size_t>(catalog.size()));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<int> eligible;
  for (BrbId b : order) {
    eligible.clear();
    for (int k2 = 0; k2 < num_dbs; ++k2) {
      const auto k = static_cast<std::size_t>(k2);
      if (m.rate_bps[k] < s.demand_bps[k] && catalog.fits_budget(m.assigned[k], b, s.budget[k])) {
        eligible.push_back(k2);
      }
    }
    if (eligible.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
    const int k2 = eligible[pick(rng)];
    const auto k = static_cast<std::size_t>(k2);
    m.assign(b, k2);
    m.rate_bps[k] += links.rate(catalog[b].owner, catalog.channel_index(b), k2);
    m.cost[k] = catalog.price_sum(m.assigned[k]);
  }
  return m;
}

Matching random_allocate(const Scenario& s, const ChannelRealization& ch, Rng& rng) {
  return random_allocate(s, LinkTable(s, ch), rng);
}

}  // namespace backhaul
