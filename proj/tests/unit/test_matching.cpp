#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "backhaul/errors.hpp"
#include "backhaul/format.hpp"
#include "backhaul/matching.hpp"
#include "backhaul/oracle.hpp"
#include "backhaul/rng.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace backhaul;

namespace {

// Straightforward re-implementation of the round structure used as a
// reference: every quantity is recomputed from scratch each round.
struct NaiveOutcome {
  std::vector<std::set<int>> held;
  int rounds = 0;
  long proposals = 0;
};

struct NaiveBrb {
  int owner;
  int n;  // carrier-spanning index
  bool mmw;
  int band_index;
  double bandwidth;
  double price;
};

std::vector<NaiveBrb> naive_brbs(const Scenario& s) {
  std::vector<NaiveBrb> out;
  for (int a = 0; a < s.num_anchors(); ++a) {
    for (int n = 0; n < s.mmw.num_brbs; ++n) {
      out.push_back({a, n, true, n, s.mmw.brb_bandwidth_hz, s.prices.per_anchor[a][0]});
    }
    for (int n = 0; n < s.sub6.num_brbs; ++n) {
      out.push_back({a, s.mmw.num_brbs + n, false, n, s.sub6.brb_bandwidth_hz, s.prices.per_anchor[a][1]});
    }
  }
  return out;
}

NaiveOutcome naive_matching(const Scenario& s, const LinkTable& links, double zeta) {
  const auto brbs = naive_brbs(s);
  const int nb = static_cast<int>(brbs.size());
  const int nd = s.num_demanding();
  auto rate = [&](int b, int k) { return links.rate(brbs[b].owner, brbs[b].n, k); };
  auto utility = [&](int b, int k) { return rate(b, k) - zeta * brbs[b].price; };
  auto better = [&](int a, int b, int k) {  // strict preference of station k
    if (utility(a, k) != utility(b, k)) return utility(a, k) > utility(b, k);
    if (brbs[a].price != brbs[b].price) return brbs[a].price < brbs[b].price;
    if (brbs[a].mmw != brbs[b].mmw) return brbs[a].mmw;
    if (brbs[a].owner != brbs[b].owner) return brbs[a].owner < brbs[b].owner;
    return brbs[a].band_index < brbs[b].band_index;
  };

  NaiveOutcome out;
  out.held.resize(static_cast<std::size_t>(nd));
  std::vector<int> owner(static_cast<std::size_t>(nb), -1);
  std::vector<std::vector<bool>> applied(static_cast<std::size_t>(nd), std::vector<bool>(static_cast<std::size_t>(nb)));
  while (true) {
    std::map<int, std::vector<int>> applicants;
    long count = 0;
    for (int k = 0; k < nd; ++k) {
      double r = 0.0, c = 0.0;
      for (int b : out.held[k]) {
        r += rate(b, k);
        c += brbs[b].price;
      }
      if (!(r < s.demand_bps[k])) continue;
      int pick = -1;
      for (int b = 0; b < nb; ++b) {
        if (applied[k][b] || !(c + brbs[b].price <= s.budget[k])) continue;
        if (pick < 0 || better(b, pick, k)) pick = b;
      }
      if (pick < 0) continue;
      applied[k][pick] = true;
      applicants[pick].push_back(k);
      ++count;
    }
    if (count == 0) break;
    ++out.rounds;
    out.proposals += count;
    for (auto& [b, ks] : applicants) {
      int best = owner[b];
      for (int k : ks) {  // ks ascending
        if (best < 0 || rate(b, k) > rate(b, best)) best = k;
      }
      if (best == owner[b]) continue;
      if (owner[b] >= 0) out.held[owner[b]].erase(b);
      owner[b] = best;
      out.held[best].insert(b);
    }
  }
  return out;
}

void check_against_naive(const Scenario& s, const ChannelRealization& ch, double zeta) {
  const LinkTable links(s, ch);
  const Matching m = run_matching(s, links, zeta);
  const NaiveOutcome ref = naive_matching(s, links, zeta);
  CHECK(m.rounds == ref.rounds);
  CHECK(m.proposals == ref.proposals);
  for (std::size_t k = 0; k < m.assigned.size(); ++k) {
    const std::set<int> got(m.assigned[k].begin(), m.assigned[k].end());
    CHECK(got == ref.held[k]);
  }
}

Brb mmw_brb(double price) { return Brb{0, BandKind::MmWave, 0, 4.86e6, price}; }

}  // namespace

TEST_CASE("station utility trades rate against price") {
  CHECK(dbs_utility(mmw_brb(5.0), 3.0, 0.0) == brb_rate(4.86e6, 3.0));
  const Brb sub6{0, BandKind::Sub6, 0, 480e3, 10.0};
  CHECK(dbs_utility(sub6, 1.0, 1e6) == doctest::Approx(-9.52e6).epsilon(1e-12));
  const Brb cheap = mmw_brb(0.1), dear = mmw_brb(10.0);
  CHECK(dbs_utility(cheap, 7.0, 1e6) > dbs_utility(dear, 7.0, 1e6));
  CHECK(dbs_prefers(cheap, dbs_utility(cheap, 7.0, 1e6), dear, dbs_utility(dear, 7.0, 1e6)));
}

TEST_CASE("BRB utility is the applicant's achievable rate") {
  CHECK(brb_utility(0.0, 480e3) == 0.0);
  for (double g : {0.0, 0.5, 1.0, 17.0, 1e4}) {
    CHECK(brb_utility(g, 480e3) == brb_rate(480e3, g));
    CHECK(brb_utility(g, 4.86e6) == brb_rate(4.86e6, g));
  }
  CHECK(brb_utility(5.0, 480e3) > brb_utility(4.0, 480e3));
}

TEST_CASE("preference ties fall to price, band, owner, index") {
  const Brb a{0, BandKind::MmWave, 3, 4.86e6, 1.0};
  Brb b = a;
  b.price = 2.0;
  CHECK(dbs_prefers(a, 5.0, b, 5.0));
  CHECK_FALSE(dbs_prefers(b, 5.0, a, 5.0));
  b = a;
  b.band = BandKind::Sub6;
  CHECK(dbs_prefers(a, 5.0, b, 5.0));
  b = a;
  b.owner = 1;
  CHECK(dbs_prefers(a, 5.0, b, 5.0));
  b = a;
  b.index = 4;
  CHECK(dbs_prefers(a, 5.0, b, 5.0));
  CHECK_FALSE(dbs_prefers(a, 5.0, a, 5.0));
  CHECK(dbs_prefers(b, 6.0, a, 5.0));
}

TEST_CASE("catalog order and canonical price sums") {
  Scenario s = testing::tiny_scenario(2, 1, 2, 1, 0.1, 10.0);
  s.prices.per_anchor[1] = {0.2, 7.0};
  const BrbCatalog c(s);
  REQUIRE(c.size() == 6);
  CHECK(c[0] == Brb{0, BandKind::MmWave, 0, 4.86e6, 0.1});
  CHECK(c[2] == Brb{0, BandKind::Sub6, 0, 480e3, 10.0});
  CHECK(c[4] == Brb{1, BandKind::MmWave, 1, 4.86e6, 0.2});
  CHECK(c.channel_index(5) == 2);
  CHECK(c.id(1, 2) == 5);
  const std::vector<BrbId> ids{0, 1, 3};
  CHECK(c.price_sum(ids) == (0.1 + 0.1) + 0.2);
  CHECK(c.fits_budget(ids, 4, 0.1 + 0.1 + 0.2 + 0.2));
  CHECK_FALSE(c.fits_budget(ids, 2, 10.0));
  CHECK(c.fits_budget(ids, 2, 10.3, BrbId{3}));
}

TEST_CASE("one station, one affordable BRB below demand") {
  const Scenario s = testing::tiny_scenario(1, 1, 1, 0);
  ChannelRealization ch = testing::zero_channels(s);
  ch.set_gain(0, 0, 0, testing::gain_for_snr(10.0));
  const Matching m = run_matching(s, ch, 1e6);
  CHECK(m.assigned[0] == std::vector<BrbId>{0});
  CHECK(m.owner_of[0] == 0);
  CHECK(m.proposals == 1);
  CHECK(m.rounds == 1);
  CHECK(m.rate_bps[0] == doctest::Approx(testing::rate_of(4.86e6, 10.0)).epsilon(1e-12));
  CHECK(m.cost[0] == 0.1);
  CHECK(m.rate_bps[0] < s.demand_bps[0]);
}

TEST_CASE("the applicant with the larger SNR wins a contested BRB") {
  const Scenario s = testing::tiny_scenario(1, 2, 1, 0);
  ChannelRealization ch = testing::zero_channels(s);
  ch.set_gain(0, 0, 0, testing::gain_for_snr(5.0));
  ch.set_gain(0, 0, 1, testing::gain_for_snr(50.0));
  const Matching m = run_matching(s, ch, 1e6);
  CHECK(m.owner_of[0] == 1);
  CHECK(m.assigned[0].empty());
  CHECK(m.proposals == 2);
  CHECK(m.rounds == 1);
}

TEST_CASE("equal applicants: lower station id, and the incumbent keeps ties") {
  SUBCASE("simultaneous tie") {
    const Scenario s = testing::tiny_scenario(1, 2, 1, 0);
    ChannelRealization ch = testing::zero_channels(s);
    ch.set_gain(0, 0, 0, testing::gain_for_snr(5.0));
    ch.set_gain(0, 0, 1, testing::gain_for_snr(5.0));
    CHECK(run_matching(s, ch, 1e6).owner_of[0] == 0);
  }
  SUBCASE("incumbent tie") {
    const Scenario s = testing::tiny_scenario(1, 2, 0, 2, 0.1, 10.0, 100.0, 1e9);
    ChannelRealization ch = testing::zero_channels(s);
    ch.set_gain(0, 0, 0, testing::gain_for_snr(10.0));
    ch.set_gain(0, 1, 0, testing::gain_for_snr(5.0));
    ch.set_gain(0, 0, 1, testing::gain_for_snr(1.0));
    ch.set_gain(0, 1, 1, testing::gain_for_snr(5.0));
    const Matching m = run_matching(s, ch, 1e6);
    CHECK(m.owner_of[0] == 0);
    CHECK(m.owner_of[1] == 1);  // station 0's equal bid in round 2 does not displace
    CHECK(m.rounds == 2);
    CHECK(m.proposals == 4);
  }
}

TEST_CASE("a displaced station becomes active again") {
  Scenario s = testing::tiny_scenario(1, 2, 0, 2, 0.1, 10.0, 100.0, 1e9);
  ChannelRealization ch = testing::zero_channels(s);
  ch.set_gain(0, 0, 0, testing::gain_for_snr(10.0));
  ch.set_gain(0, 1, 0, testing::gain_for_snr(8.0));
  ch.set_gain(0, 0, 1, testing::gain_for_snr(20.0));
  ch.set_gain(0, 1, 1, testing::gain_for_snr(30.0));
  s.demand_bps[0] = 0.99 * testing::rate_of(480e3, 10.0);  // met by BRB 0 alone
  std::vector<Matching> history;
  const Matching m = run_matching(s, LinkTable(s, ch), 1e6, [&](const Matching& x) { history.push_back(x); });
  REQUIRE(history.size() == 3);
  CHECK(history[0].owner_of[0] == 0);  // round 1: station 0 served
  CHECK(history[1].owner_of[0] == 1);  // round 2: displaced
  CHECK(m.rounds == 3);                // round 3: station 0 tries BRB 1 and loses
  CHECK(m.proposals == 4);
  CHECK(m.assigned[0].empty());
  CHECK(m.assigned[1] == std::vector<BrbId>{0, 1});
  CHECK(m.rate_bps[0] == 0.0);
  CHECK(m.cost[0] == 0.0);
  CHECK(m.cost[1] == 20.0);
}

TEST_CASE("stations only apply to BRBs they can afford") {
  // 0.1 + 0.1 + 0.1 exceeds 0.3 in binary floating point; the third BRB
  // must not be taken even though the decimal sum equals the budget.
  const Scenario s = testing::tiny_scenario(1, 1, 3, 0, 0.1, 10.0, 0.3, 1e9);
  ChannelRealization ch = testing::zero_channels(s);
  for (int n = 0; n < 3; ++n) ch.set_gain(0, n, 0, testing::gain_for_snr(10.0));
  const Matching m = run_matching(s, ch, 1e6);
  CHECK(m.assigned[0].size() == 2);
  CHECK(m.cost[0] <= s.budget[0]);
  CHECK(find_blocking_pairs(m, s, ch, 1e6).empty());

  const Scenario poor = testing::tiny_scenario(1, 1, 3, 2, 0.1, 10.0, 0.05, 1e9);
  ChannelRealization ch2 = testing::zero_channels(poor);
  for (int n = 0; n < 5; ++n) ch2.set_gain(0, n, 0, testing::gain_for_snr(10.0));
  const Matching none = run_matching(poor, ch2, 1e6);
  CHECK(none.assigned[0].empty());
  CHECK(none.rounds == 0);
}

TEST_CASE("matching agrees with an independent step-by-step replay on micro instances") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    CAPTURE(seed);
    const MicroInstance mi = make_micro_instance(derive_seed(seed, 0, 99));
    check_against_naive(mi.scenario, mi.channels, 1e6);
    check_against_naive(mi.scenario, mi.channels, 0.0);
    check_against_naive(mi.scenario, mi.channels, 1e8);
  }
}

TEST_CASE("matching agrees with the replay on small generated instances") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CAPTURE(seed);
    GenerationConfig cfg;
    cfg.num_stations = 6;
    cfg.n1 = 12;
    cfg.n2 = 6;
    cfg.budget = 3.0 + static_cast<double>(seed);
    cfg.demand_bps = 30e6;
    const Scenario s = generate_scenario(cfg, seed);
    Rng rng(seed + 100);
    check_against_naive(s, realize_channels(s, rng), 1e6);
  }
}

TEST_CASE("intermediate states keep budgets, quotas and monotone BRB quality") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    const Scenario s = generate_scenario(GenerationConfig{}, derive_seed(seed, 0, kPlacementStream));
    Rng rng(derive_seed(seed, 0, kChannelStream));
    const ChannelRealization ch = realize_channels(s, rng);
    const LinkTable links(s, ch);
    const BrbCatalog catalog(s);
    std::vector<double> quality(static_cast<std::size_t>(catalog.size()), -1.0);
    bool ok = true;
    int observed = 0;
    const Matching m = run_matching(s, links, 1e6, [&](const Matching& x) {
      ++observed;
      check_consistency(x, catalog.size());
      for (std::size_t k = 0; k < x.assigned.size(); ++k) {
        ok = ok && x.cost[k] <= s.budget[k];
        ok = ok && x.cost[k] == catalog.price_sum(x.assigned[k]);
      }
      for (BrbId b = 0; b < catalog.size(); ++b) {
        const auto& o = x.owner_of[static_cast<std::size_t>(b)];
        const double q = o ? links.rate(catalog[b].owner, catalog.channel_index(b), *o) : -1.0;
        ok = ok && q >= quality[static_cast<std::size_t>(b)];
        quality[static_cast<std::size_t>(b)] = q;
      }
    });
    CHECK(ok);
    CHECK(observed == m.rounds);
  }
}

TEST_CASE("matching outcomes on the reference setup are stable and within bounds") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    CAPTURE(seed);
    const Scenario s = generate_scenario(GenerationConfig{}, derive_seed(seed, 0, kPlacementStream));
    Rng rng(derive_seed(seed, 0, kChannelStream));
    const ChannelRealization ch = realize_channels(s, rng);
    const LinkTable links(s, ch);
    const BrbCatalog catalog(s);
    const Matching m = run_matching(s, links, 1e6);
    CHECK(find_blocking_pairs(m, s, links, 1e6).empty());
    const std::int64_t n = s.num_brbs_per_anchor();
    CHECK(m.proposals <= static_cast<std::int64_t>(s.num_demanding()) * s.num_anchors() * n);
    CHECK(m.rounds <= s.num_anchors() * n);
    for (std::size_t k = 0; k < m.assigned.size(); ++k) {
      CHECK(m.cost[k] <= s.budget[k]);
      const double recomputed = assigned_rate(m.assigned[k], static_cast<int>(k), catalog, links);
      CHECK(m.rate_bps[k] == doctest::Approx(recomputed).epsilon(1e-9));
      CHECK(std::is_sorted(m.assigned[k].begin(), m.assigned[k].end()));
    }
    CHECK(m == run_matching(s, links, 1e6));
  }
}

TEST_CASE("blocking pairs: constructed swap counterexample") {
  // One anchor with one mmW and one sub-6 BRB. The station holds the costly,
  // weak sub-6 BRB and has met its demand; swapping for the free mmW BRB fits
  // the budget and raises utility, so (0, mmW) blocks.
  Scenario s = testing::tiny_scenario(1, 1, 1, 1, 0.1, 10.0, 10.0, 1.0);
  ChannelRealization ch = testing::zero_channels(s);
  ch.set_gain(0, 0, 0, testing::gain_for_snr(100.0));
  ch.set_gain(0, 1, 0, testing::gain_for_snr(1.0));
  const LinkTable links(s, ch);
  Matching m = Matching::empty(1, 2);
  m.assign(1, 0);
  m.rate_bps[0] = links.rate(0, 1, 0);
  m.cost[0] = 10.0;
  REQUIRE_FALSE(m.rate_bps[0] < s.demand_bps[0]);  // the addition route is closed
  const auto pairs = find_blocking_pairs(m, s, links, 1e6);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0] == BlockingPair{0, 0});

  // Same holding, but the budget forbids the swap: no blocking pair.
  s.budget[0] = 10.0;
  s.prices.per_anchor[0][0] = 10.5;
  CHECK(find_blocking_pairs(m, s, links, 1e6).empty());
}

TEST_CASE("blocking pairs: addition route and BRB-side preference") {
  Scenario s = testing::tiny_scenario(1, 2, 1, 0, 0.1, 10.0, 60.0, 1e9);
  ChannelRealization ch = testing::zero_channels(s);
  ch.set_gain(0, 0, 0, testing::gain_for_snr(5.0));
  ch.set_gain(0, 0, 1, testing::gain_for_snr(9.0));
  const LinkTable links(s, ch);

  Matching empty = Matching::empty(2, 1);
  const auto all = find_blocking_pairs(empty, s, links, 1e6);
  CHECK(all.size() == 2);

  Matching weak = Matching::empty(2, 1);
  weak.assign(0, 0);
  weak.rate_bps[0] = links.rate(0, 0, 0);
  weak.cost[0] = 0.1;
  const auto pairs = find_blocking_pairs(weak, s, links, 1e6);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0] == BlockingPair{1, 0});

  Matching strong = Matching::empty(2, 1);
  strong.assign(0, 1);
  strong.rate_bps[1] = links.rate(0, 0, 1);
  strong.cost[1] = 0.1;
  CHECK(find_blocking_pairs(strong, s, links, 1e6).empty());
}

TEST_CASE("blocking pairs: nobody wants anything when demands are zero") {
  Scenario s = testing::tiny_scenario(2, 3, 2, 2);
  for (auto& d : s.demand_bps) d = 0.0;
  Rng rng(4);
  const ChannelRealization ch = realize_channels(s, rng);
  CHECK(find_blocking_pairs(Matching::empty(3, 8), s, ch, 1e6).empty());
}

TEST_CASE("inconsistent matchings are rejected") {
  const Scenario s = testing::tiny_scenario(1, 2, 2, 0);
  const ChannelRealization ch = testing::zero_channels(s);
  Matching m = Matching::empty(2, 2);
  m.assigned[0] = {0};
  CHECK_THROWS_AS(find_blocking_pairs(m, s, ch, 1e6), ConsistencyError);
  m = Matching::empty(2, 2);
  m.assigned[0] = {1};
  m.assigned[1] = {1};
  m.owner_of[1] = 1;
  CHECK_THROWS_AS(check_consistency(m, 2), ConsistencyError);
  CHECK_THROWS_AS(check_consistency(Matching::empty(2, 3), 2), ConsistencyError);
  CHECK_NOTHROW(check_consistency(Matching::empty(2, 2), 2));
}

TEST_CASE("matching CSV rows are sorted and band-local") {
  Scenario s = testing::tiny_scenario(2, 2, 1, 1, 0.1, 10.0, 60.0, 1e9);
  ChannelRealization ch = testing::zero_channels(s);
  ch.set_gain(1, 0, 0, testing::gain_for_snr(3.0));
  ch.set_gain(0, 1, 1, testing::gain_for_snr(1.0));
  const LinkTable links(s, ch);
  Matching m = Matching::empty(2, 4);
  m.assign(2, 0);  // anchor 1, mmW 0
  m.assign(1, 1);  // anchor 0, sub-6 0
  const auto p = testing::temp_path("matching.csv");
  write_matching_csv(m, s, links, p);
  const std::string expected = "k2,k1,band,n,gamma,rate_bps,price\n0,1,mmw,0," + format_double(links.gamma(1, 0, 0)) +
                               "," + format_double(links.rate(1, 0, 0)) + ",0.1\n1,0,sub6,0," +
                               format_double(links.gamma(0, 1, 1)) + "," + format_double(links.rate(0, 1, 1)) + ",10\n";
  CHECK(testing::slurp(p) == expected);
}
