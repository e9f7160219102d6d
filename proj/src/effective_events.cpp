#include "lobtt/effective_events.hpp"

#include <bit>
#include <cassert>

namespace lobtt {

int SignatureMask::count() const { return std::popcount(bits); }

SignatureMask signature_of(const std::vector<EffectiveEvent>& events) {
  SignatureMask m;
  for (const EffectiveEvent& e : events) m.add(e.sign, e.level, e.side);
  return m;
}

SignatureMask signature_of(const LobEvent& ev) {
  SignatureMask m;
  m.add(ev.signed_size < 0 ? -1 : +1, ev.level, ev.side);
  return m;
}

namespace {

// 1 or 2 when the price sits at a visible level of the book, 0 otherwise.
int visible_level(Side side, Tick price, const LobState& now) {
  if (side == Side::Buy) {
    if (price == now.b1) return 1;
    if (price == now.b2) return 2;
  } else {
    if (price == now.c1) return 1;
    if (price == now.c2) return 2;
  }
  return 0;
}

void reconcile_side(Side side, const std::optional<RestingOrder>& cur, Tick target,
                    int target_level, const LobState& now, Volume order_size,
                    std::optional<RestingOrder>& out, std::vector<EffectiveEvent>& events) {
  if (cur && cur->price == target) {
    if (cur->volume < order_size) events.push_back({+1, target_level, side});
    out = RestingOrder{target, order_size};
    return;
  }
  if (cur) {
    if (int lvl = visible_level(side, cur->price, now); lvl != 0)
      events.push_back({-1, lvl, side});
  }
  events.push_back({+1, target_level, side});
  out = RestingOrder{target, order_size};
}

}  // namespace

ReconcileResult reconcile(Action action, const MMOrders& current, const LobState& now,
                          Volume order_size) {
  assert(order_size > 0);
  ReconcileResult res;

  if (action.is_liquidate()) {
    if (current.buy) {
      if (int lvl = visible_level(Side::Buy, current.buy->price, now); lvl != 0)
        res.events.push_back({-1, lvl, Side::Buy});
    }
    if (current.sell) {
      if (int lvl = visible_level(Side::Sell, current.sell->price, now); lvl != 0)
        res.events.push_back({-1, lvl, Side::Sell});
    }
    return res;
  }

  const Tick buy_target = action.buy_level() == 1 ? now.b1 : now.b2;
  const Tick sell_target = action.sell_level() == 1 ? now.c1 : now.c2;
  reconcile_side(Side::Buy, current.buy, buy_target, action.buy_level(), now, order_size,
                 res.orders.buy, res.events);
  reconcile_side(Side::Sell, current.sell, sell_target, action.sell_level(), now,
                 order_size, res.orders.sell, res.events);
  return res;
}

}  // namespace lobtt
