#pragma once

// Shared scaffolding for the unit tests: a tiny event-log builder that keeps
// snapshots consistent by construction, and an intentionally naive candidate
// filter to check the indexed queries against.

#include <algorithm>
#include <cstdlib>
#include <string>
#include <vector>

#include "lobtt/book.hpp"
#include "lobtt/effective_events.hpp"
#include "lobtt/jump_index.hpp"

namespace lobtt_test {

using namespace lobtt;

// Appends events to a log, deriving each post_state through apply_event so the
// result always passes validate_log. For depletions, pass the revealed second
// level (price, volume); it is threaded through the snapshot the way a real
// feed would carry it.
struct LogBuilder {
  EventLog log;
  LobState cur;
  std::int64_t ts = 0;

  explicit LogBuilder(const LobState& init, double tick = 0.005,
                      std::string id = "day-test") {
    log.day_id = std::move(id);
    log.tick_size = tick;
    log.initial_state = init;
    cur = init;
  }

  LogBuilder& ev(Side side, int level, Volume signed_size, Tick price, Tick reveal_price = 0,
                 Volume reveal_volume = 0) {
    LobEvent e;
    e.index = static_cast<EventIndex>(log.events.size());
    ts += 10;
    e.timestamp_us = ts;
    e.side = side;
    e.level = level;
    e.signed_size = signed_size;
    e.price = price;
    if (side == Side::Buy) {
      e.post_state.b2 = reveal_price;
      e.post_state.vb2 = reveal_volume;
    } else {
      e.post_state.c2 = reveal_price;
      e.post_state.vs2 = reveal_volume;
    }
    e.post_state = apply_event(cur, e).state;
    cur = e.post_state;
    log.events.push_back(e);
    return *this;
  }
};

// O(T * t_next) per query, no dictionaries, no sliding windows: the reference
// the fast path must match exactly.
inline std::vector<EventIndex> brute_candidates(const EventLog& log, const JumpConfig& cfg,
                                                const MarketStateKey& key,
                                                SignatureMask required, EventIndex t_now) {
  const EventIndex T = static_cast<EventIndex>(log.events.size());
  auto mask_at = [&](EventIndex t) {
    SignatureMask m;
    const EventIndex last = std::min<EventIndex>(t + cfg.t_next, T - 1);
    for (EventIndex j = t; j <= last; ++j)
      m.bits = static_cast<std::uint16_t>(
          m.bits | signature_of(log.events[static_cast<std::size_t>(j)]).bits);
    return m;
  };
  for (Tick d = 0; d < cfg.max_spread_shells(log.tick_size); ++d) {
    std::vector<EventIndex> out;
    for (EventIndex t = 0; t < T; ++t) {
      const MarketStateKey k = state_key(state_at(log, t));
      if (k.imbalance_sign != key.imbalance_sign) continue;
      if (k.spread != key.spread - d && k.spread != key.spread + d) continue;
      if (!mask_at(t).covers(required)) continue;
      if (std::llabs(t - t_now) <= cfg.exclusion_radius) continue;
      if (!cfg.allow_past_jumps && t <= t_now) continue;
      out.push_back(t);
    }
    if (!out.empty()) return out;
  }
  return {};
}

// 100 x 100 book with a 1-tick spread and flat level-1 volumes (imbalance
// sign 0 everywhere as long as events stay at level 2).
inline LobState flat_state() {
  return LobState{11, 100, 10, 100, 12, 100, 13, 100};
}

}  // namespace lobtt_test
