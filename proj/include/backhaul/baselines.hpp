#pragma once

#include "backhaul/matching.hpp"
#include "backhaul/propagation.hpp"
#include "backhaul/rng.hpp"
#include "backhaul/scenario.hpp"

namespace backhaul {

/// Greedy max-rate allocation that ignores prices and budgets. Repeatedly
/// assigns the globally best-rate (BRB, station) pair among stations still
/// below demand. Pairs with zero rate are never assigned. Cost is recorded
/// and may exceed the budget.
Matching best_effort_allocate(const Scenario& s, const LinkTable& links);
Matching best_effort_allocate(const Scenario& s, const ChannelRealization& ch);

/// Visits BRBs in shuffled order and gives each to a uniformly chosen
/// station that is below demand and can still afford it.
Matching random_allocate(const Scenario& s, const LinkTable& links, Rng& rng);
Matching random_allocate(const Scenario& s, const ChannelRealization& ch, Rng& rng);

}  // namespace backhaul
