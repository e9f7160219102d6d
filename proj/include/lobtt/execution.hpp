#pragma once

#include "lobtt/book.hpp"
#include "lobtt/effective_events.hpp"

namespace lobtt {

struct Inventory {
  Volume position = 0;  // signed shares
};

// All reward parts in half-tick * share units (exact integers: mids are in
// half-ticks and prices in ticks).
struct RewardAccumulator {
  std::int64_t inventory_part = 0;   // position * mid move, per event
  std::int64_t execution_part = 0;   // edge vs the pre-event mid on each fill
  std::int64_t liquidation_part = 0; // flattening penalties, <= 0
};

inline std::int64_t total_reward(const RewardAccumulator& a) {
  return a.inventory_part + a.execution_part + a.liquidation_part;
}

// Matched volume when a historical transaction of v_trans crosses a virtual
// order of v_mm resting beside historical volume v_hist at the same price:
// floor(v_mm * v_trans / (v_hist + v_mm)), clamped to min(v_mm, v_trans).
// The denominator keeps the two volumes disjoint; the virtual order is never
// inserted into the historical book.
Volume pro_rata_fill(Volume v_mm, Volume v_hist, Volume v_trans);

struct IntervalResult {
  MMOrders orders;
  Inventory inventory;
  RewardAccumulator rewards;
  Volume bought = 0;
  Volume sold = 0;
};

// Replays events [from, to) with the quotes overlaid on the book. A liquidity
// removal on a quote's side fills it pro rata at the quote's price and in full
// strictly through it; a book whose best opposite quote reaches the price
// fills the remainder. Fills update the inventory immediately; each event then
// pays position * (mid move). Orders filled down to zero volume disappear.
IntervalResult process_interval(const MMOrders& orders, Inventory inv,
                                const EventLog& log, EventIndex from, EventIndex to);

// Flattens the position at half the spread: zeroes it and returns the positive
// penalty |position| * spread_ticks in half-tick * share units.
std::int64_t enforce_liquidation(Inventory& inv, Tick spread);

}  // namespace lobtt
