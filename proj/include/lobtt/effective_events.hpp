#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lobtt/book.hpp"

namespace lobtt {

// The five decisions available at an activation: quote at (buy level, sell
// level) in {1,2} x {1,2}, or cancel both quotes and flatten the position.
struct Action {
  static constexpr int kCount = 5;
  static constexpr int kLiquidate = 4;

  int id = 0;  // 0:(1,1) 1:(1,2) 2:(2,1) 3:(2,2) 4:liquidate

  bool is_liquidate() const { return id == kLiquidate; }
  int buy_level() const { return 1 + id / 2; }
  int sell_level() const { return 1 + id % 2; }
};

// An agent decision projected onto the book alphabet: liquidity added (+1) or
// removed (-1) at a visible level on a side. The agent never posts inside the
// spread, so level 0 does not occur in agent-generated events.
struct EffectiveEvent {
  int sign = +1;
  int level = 1;
  Side side = Side::Buy;

  bool operator==(const EffectiveEvent&) const = default;
};

// One bit per (side, level, sign), side-major, then level, then sign:
//   bit 0 (+,0,B)   bit 1 (-,0,B)   bit 2 (+,1,B)   bit 3 (-,1,B)
//   bit 4 (+,2,B)   bit 5 (-,2,B)   bit 6 (+,0,S)   bit 7 (-,0,S)
//   bit 8 (+,1,S)   bit 9 (-,1,S)   bit 10 (+,2,S)  bit 11 (-,2,S)
// This layout is stable; index caches persist these masks.
struct SignatureMask {
  std::uint16_t bits = 0;

  static constexpr int kBits = 12;

  static int bit_of(int sign, int level, Side side) {
    return (side == Side::Sell ? 6 : 0) + 2 * level + (sign < 0 ? 1 : 0);
  }

  void add(int sign, int level, Side side) {
    bits = static_cast<std::uint16_t>(bits | (1u << bit_of(sign, level, side)));
  }

  bool covers(SignatureMask required) const {
    return (bits & required.bits) == required.bits;
  }

  bool empty() const { return bits == 0; }
  int count() const;

  bool operator==(const SignatureMask&) const = default;
};

SignatureMask signature_of(const std::vector<EffectiveEvent>& events);
SignatureMask signature_of(const LobEvent& ev);

struct RestingOrder {
  Tick price = 0;
  Volume volume = 0;  // in (0, order_size]
};

struct MMOrders {
  std::optional<RestingOrder> buy;
  std::optional<RestingOrder> sell;
};

struct ReconcileResult {
  MMOrders orders;
  std::vector<EffectiveEvent> events;  // distinct by construction
};

// Moves the resting quotes to where `action` wants them given the book `now`,
// and returns the induced effective events:
//   - a cancel for an order leaving a price still visible in `now` (no event
//     when the old price fell outside the two-level window),
//   - an insertion for a new or moved order,
//   - an insertion for a replenishment back to order_size at an unchanged
//     price after a partial fill,
//   - nothing for an order already at the target price with full size.
// Liquidate cancels both sides and leaves no resting orders.
ReconcileResult reconcile(Action action, const MMOrders& current, const LobState& now,
                          Volume order_size);

}  // namespace lobtt
