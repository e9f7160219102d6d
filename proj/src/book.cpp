#include "lobtt/book.hpp"

#include <cassert>
#include <limits>

namespace lobtt {

bool valid_state(const LobState& s) {
  return s.b2 < s.b1 && s.b1 < s.c1 && s.c1 < s.c2 && s.b2 > 0 && s.vb1 >= 1 &&
         s.vb2 >= 1 && s.vs1 >= 1 && s.vs2 >= 1;
}

double imbalance(const LobState& s) {
  return static_cast<double>(s.vb1 - s.vs1) / static_cast<double>(s.vb1 + s.vs1);
}

MarketStateKey state_key(const LobState& s) {
  const Volume d = s.vb1 - s.vs1;
  return MarketStateKey{d > 0 ? 1 : d < 0 ? -1 : 0, spread_ticks(s)};
}

ApplyOutcome apply_event(const LobState& state, const LobEvent& ev) {
  if (ev.signed_size == 0) throw InapplicableEvent("event has zero signed_size");
  if (ev.level < 0 || ev.level > 2) throw InapplicableEvent("event level out of range");
  if (ev.price <= 0) throw InapplicableEvent("event price must be positive");

  ApplyOutcome out{state, false, false};
  LobState& r = out.state;
  const Volume sz = ev.signed_size;

  if (ev.level == 0) {
    if (sz < 0) throw InapplicableEvent("level-0 events only add liquidity");
    if (!(state.b1 < ev.price && ev.price < state.c1))
      throw InapplicableEvent("level-0 price is not inside the spread");
    if (ev.side == Side::Buy) {
      r.b2 = state.b1;
      r.vb2 = state.vb1;
      r.b1 = ev.price;
      r.vb1 = sz;
    } else {
      r.c2 = state.c1;
      r.vs2 = state.vs1;
      r.c1 = ev.price;
      r.vs1 = sz;
    }
  } else if (ev.side == Side::Buy) {
    const Tick ref = ev.level == 1 ? state.b1 : state.b2;
    const Volume vol = ev.level == 1 ? state.vb1 : state.vb2;
    if (ev.price != ref) throw InapplicableEvent("price does not match the bid level");
    if (sz < 0 && -sz > vol) throw InapplicableEvent("removal exceeds resting bid volume");
    if (vol + sz == 0) {
      if (ev.level == 1) {
        r.b1 = state.b2;
        r.vb1 = state.vb2;
      }
      r.b2 = ev.post_state.b2;
      r.vb2 = ev.post_state.vb2;
      out.second_bid_from_snapshot = true;
    } else {
      (ev.level == 1 ? r.vb1 : r.vb2) = vol + sz;
    }
  } else {
    const Tick ref = ev.level == 1 ? state.c1 : state.c2;
    const Volume vol = ev.level == 1 ? state.vs1 : state.vs2;
    if (ev.price != ref) throw InapplicableEvent("price does not match the ask level");
    if (sz < 0 && -sz > vol) throw InapplicableEvent("removal exceeds resting ask volume");
    if (vol + sz == 0) {
      if (ev.level == 1) {
        r.c1 = state.c2;
        r.vs1 = state.vs2;
      }
      r.c2 = ev.post_state.c2;
      r.vs2 = ev.post_state.vs2;
      out.second_ask_from_snapshot = true;
    } else {
      (ev.level == 1 ? r.vs1 : r.vs2) = vol + sz;
    }
  }

  if (!valid_state(r)) throw InapplicableEvent("applied event breaks book ordering");
  return out;
}

const LobState& state_at(const EventLog& log, EventIndex t) {
  assert(t >= 0 && t <= static_cast<EventIndex>(log.events.size()));
  if (t == 0) return log.initial_state;
  return log.events[static_cast<std::size_t>(t - 1)].post_state;
}

std::vector<ValidationIssue> validate_log(const EventLog& log) {
  std::vector<ValidationIssue> issues;
  if (log.tick_size <= 0.0) issues.push_back({-1, "tick_size must be positive"});
  if (!valid_state(log.initial_state))
    issues.push_back({-1, "initial state breaks book ordering"});

  // Continue from the applied result when possible, so one corrupt snapshot
  // yields exactly one report instead of cascading into its successors.
  LobState cur = log.initial_state;
  std::int64_t prev_ts = std::numeric_limits<std::int64_t>::min();
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    const LobEvent& ev = log.events[i];
    const EventIndex idx = static_cast<EventIndex>(i);
    if (ev.index != idx)
      issues.push_back({idx, "index field does not match event position"});
    if (ev.timestamp_us < prev_ts)
      issues.push_back({idx, "timestamp decreases"});
    prev_ts = std::max(prev_ts, ev.timestamp_us);
    if (!valid_state(ev.post_state))
      issues.push_back({idx, "post state breaks book ordering"});
    try {
      ApplyOutcome out = apply_event(cur, ev);
      if (!(out.state == ev.post_state))
        issues.push_back({idx, "applied result disagrees with carried snapshot"});
      cur = out.state;
    } catch (const InapplicableEvent& e) {
      issues.push_back({idx, e.what()});
      cur = ev.post_state;  // best effort resync
    }
  }
  return issues;
}

}  // namespace lobtt
