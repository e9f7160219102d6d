#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lobtt {

using Tick = std::int64_t;        // price as an integer multiple of the tick size
using Volume = std::int64_t;      // shares
using EventIndex = std::int64_t;  // position within a day

enum class Side : std::uint8_t { Buy, Sell };

inline char side_char(Side s) { return s == Side::Buy ? 'B' : 'S'; }

// Two best levels per side. Prices strictly ordered b2 < b1 < c1 < c2 and all
// four volumes >= 1; anything outside this window is not represented.
struct LobState {
  Tick b1 = 0;
  Volume vb1 = 0;
  Tick b2 = 0;
  Volume vb2 = 0;
  Tick c1 = 0;
  Volume vs1 = 0;
  Tick c2 = 0;
  Volume vs2 = 0;

  bool operator==(const LobState&) const = default;
};

bool valid_state(const LobState& s);

// Mid is kept in half-ticks so it stays integral: (b1 + c1) / 2 ticks == b1 + c1
// half-ticks. Spread is in ticks and is >= 1 for any valid state.
inline std::int64_t mid_half_ticks(const LobState& s) { return s.b1 + s.c1; }
inline Tick spread_ticks(const LobState& s) { return s.c1 - s.b1; }

// (vb1 - vs1) / (vb1 + vs1), in [-1, 1].
double imbalance(const LobState& s);

// The discretized market state used for jump matching: queue-imbalance sign and
// the exact spread (the agent's coarser spread bucket lives in qlearn.hpp).
struct MarketStateKey {
  int imbalance_sign = 0;  // sign(vb1 - vs1)
  Tick spread = 1;

  bool operator==(const MarketStateKey&) const = default;
};

MarketStateKey state_key(const LobState& s);

// One book change. level 1 = at the best, level 2 = at the second best,
// level 0 = a new best posted inside the spread (insertions only).
// signed_size > 0 adds liquidity, < 0 removes it. A removal that empties a
// level promotes the next one; the newly revealed second level cannot be
// derived from (state, event) and is taken from the carried snapshot.
struct LobEvent {
  EventIndex index = 0;
  std::int64_t timestamp_us = 0;
  Side side = Side::Buy;
  int level = 1;
  Volume signed_size = 0;
  Tick price = 0;
  LobState post_state;

  bool operator==(const LobEvent&) const = default;
};

struct EventLog {
  std::string day_id;
  double tick_size = 0.0;  // currency per tick
  LobState initial_state;
  std::vector<LobEvent> events;

  bool operator==(const EventLog&) const = default;
};

class InapplicableEvent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ApplyOutcome {
  LobState state;
  // Set when a depletion vacated the second level and (price, volume) there
  // were refilled from the event's snapshot rather than derived.
  bool second_bid_from_snapshot = false;
  bool second_ask_from_snapshot = false;
};

// Applies one event. Throws InapplicableEvent when the event cannot follow
// from the state: wrong price for its level, removal larger than the resting
// volume, a level-0 price outside the open spread, or a result that breaks
// the book ordering.
ApplyOutcome apply_event(const LobState& state, const LobEvent& ev);

// State at index t: X_0 is the day's initial state and X_t for t >= 1 is the
// snapshot carried by event t-1. Valid for t in [0, events.size()].
const LobState& state_at(const EventLog& log, EventIndex t);

struct ValidationIssue {
  EventIndex event_index = 0;  // -1 refers to the day header / initial state
  std::string message;
};

// Replays the whole day through apply_event and reports every inconsistency:
// bad initial state, out-of-order timestamps or indices, inapplicable events,
// and events whose applied result disagrees with the carried snapshot on a
// determinable field. Returns an empty vector for a clean day.
std::vector<ValidationIssue> validate_log(const EventLog& log);

}  // namespace lobtt
