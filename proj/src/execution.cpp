#include "lobtt/execution.hpp"

#include <cassert>
#include <cstdlib>

namespace lobtt {

Volume pro_rata_fill(Volume v_mm, Volume v_hist, Volume v_trans) {
  assert(v_mm >= 0 && v_hist >= 0 && v_trans >= 0);
  if (v_mm == 0 || v_trans == 0) return 0;
  const Volume share = (v_mm * v_trans) / (v_hist + v_mm);
  return std::min({share, v_mm, v_trans});
}

namespace {

void fill_buy(IntervalResult& res, Volume v, std::int64_t m_pre) {
  RestingOrder& o = *res.orders.buy;
  v = std::min(v, o.volume);
  if (v <= 0) return;
  o.volume -= v;
  res.inventory.position += v;
  res.bought += v;
  res.rewards.execution_part += v * (m_pre - 2 * o.price);
  if (o.volume == 0) res.orders.buy.reset();
}

void fill_sell(IntervalResult& res, Volume v, std::int64_t m_pre) {
  RestingOrder& o = *res.orders.sell;
  v = std::min(v, o.volume);
  if (v <= 0) return;
  o.volume -= v;
  res.inventory.position -= v;
  res.sold += v;
  res.rewards.execution_part += v * (2 * o.price - m_pre);
  if (o.volume == 0) res.orders.sell.reset();
}

}  // namespace

IntervalResult process_interval(const MMOrders& orders, Inventory inv,
                                const EventLog& log, EventIndex from, EventIndex to) {
  assert(0 <= from && from <= to &&
         to <= static_cast<EventIndex>(log.events.size()));
  IntervalResult res{orders, inv, {}, 0, 0};

  for (EventIndex j = from; j < to; ++j) {
    const LobEvent& ev = log.events[static_cast<std::size_t>(j)];
    const LobState& pre = state_at(log, j);
    const LobState& post = ev.post_state;
    const std::int64_t m_pre = mid_half_ticks(pre);

    if (ev.signed_size < 0) {
      const Volume traded = -ev.signed_size;
      if (ev.side == Side::Buy && res.orders.buy) {
        const Tick quote = res.orders.buy->price;
        if (ev.price == quote) {
          const Volume hist = ev.level == 1 ? pre.vb1 : pre.vb2;
          fill_buy(res, pro_rata_fill(res.orders.buy->volume, hist, traded), m_pre);
        } else if (ev.price < quote) {
          fill_buy(res, res.orders.buy->volume, m_pre);
        }
      } else if (ev.side == Side::Sell && res.orders.sell) {
        const Tick quote = res.orders.sell->price;
        if (ev.price == quote) {
          const Volume hist = ev.level == 1 ? pre.vs1 : pre.vs2;
          fill_sell(res, pro_rata_fill(res.orders.sell->volume, hist, traded), m_pre);
        } else if (ev.price > quote) {
          fill_sell(res, res.orders.sell->volume, m_pre);
        }
      }
    }

    if (res.orders.buy && post.c1 <= res.orders.buy->price)
      fill_buy(res, res.orders.buy->volume, m_pre);
    if (res.orders.sell && post.b1 >= res.orders.sell->price)
      fill_sell(res, res.orders.sell->volume, m_pre);

    res.rewards.inventory_part +=
        res.inventory.position * (mid_half_ticks(post) - m_pre);
  }
  return res;
}

std::int64_t enforce_liquidation(Inventory& inv, Tick spread) {
  assert(spread >= 1);
  const std::int64_t penalty = std::llabs(inv.position) * spread;
  inv.position = 0;
  return penalty;
}

}  // namespace lobtt
