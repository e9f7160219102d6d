#include "lobtt/synth.hpp"

#include <cassert>
#include <cmath>
#include <functional>

#include "lobtt/rng.hpp"

namespace lobtt {

namespace {

enum class Flow : int {
  AddBest = 0,
  AddSecond,
  AddInside,
  CancelBest,
  CancelSecond,
  Market,
  kCount
};

void check_config(const GenConfig& c) {
  auto bad = [](const std::string& msg) { throw ConfigInfeasible(msg); };
  if (c.n_events < 1) bad("n_events must be >= 1");
  if (c.tick_size <= 0.0) bad("tick_size must be positive");
  if (c.initial_mid < 16) bad("initial_mid leaves no room for a four-level book");
  if (c.mean_volume < 1.0) bad("mean_volume must be >= 1");
  if (c.mean_interarrival_us < 1.0) bad("mean_interarrival_us must be >= 1");
  const double ws[] = {c.w_add_best, c.w_add_second, c.w_add_inside,
                       c.w_cancel_best, c.w_cancel_second, c.w_market};
  double sum = 0.0;
  for (double w : ws) {
    if (w < 0.0 || !std::isfinite(w)) bad("arrival weights must be finite and >= 0");
    sum += w;
  }
  if (sum <= 0.0) bad("arrival weights sum to zero");
  if (c.imbalance_feedback < 0.0 || c.imbalance_feedback > 1.0)
    bad("imbalance_feedback must be in [0, 1]");
}

// Internal book with unbounded depth; the emitted log sees only the top two
// levels of each side.
struct DeepBook {
  std::map<Tick, Volume, std::greater<Tick>> bids;
  std::map<Tick, Volume> asks;

  Tick best_bid() const { return bids.begin()->first; }
  Tick best_ask() const { return asks.begin()->first; }

  LobState snapshot() const {
    auto b = bids.begin();
    auto a = asks.begin();
    LobState s;
    s.b1 = b->first;
    s.vb1 = b->second;
    ++b;
    s.b2 = b->first;
    s.vb2 = b->second;
    s.c1 = a->first;
    s.vs1 = a->second;
    ++a;
    s.c2 = a->first;
    s.vs2 = a->second;
    return s;
  }
};

// Nth price of a side, 1-based.
template <typename Map>
typename Map::iterator nth_level(Map& m, int n) {
  auto it = m.begin();
  std::advance(it, n - 1);
  return it;
}

}  // namespace

EventLog generate_day(const GenConfig& cfg) {
  check_config(cfg);
  Rng rng(cfg.seed);

  EventLog log;
  log.day_id = cfg.day_id;
  log.tick_size = cfg.tick_size;
  log.events.reserve(static_cast<std::size_t>(cfg.n_events));

  DeepBook book;
  {
    Tick b = cfg.initial_mid - 1;
    Tick a = cfg.initial_mid + 1;
    for (int i = 0; i < 4; ++i) {
      book.bids[b - i] = rng.geometric_at_least_one(cfg.mean_volume);
      book.asks[a + i] = rng.geometric_at_least_one(cfg.mean_volume);
    }
  }
  log.initial_state = book.snapshot();

  const double weights[] = {cfg.w_add_best, cfg.w_add_second, cfg.w_add_inside,
                            cfg.w_cancel_best, cfg.w_cancel_second, cfg.w_market};
  double total_w = 0.0;
  for (double w : weights) total_w += w;

  auto draw_flow = [&]() {
    const double u = rng.uniform01() * total_w;
    double acc = 0.0;
    for (int i = 0; i < static_cast<int>(Flow::kCount); ++i) {
      acc += weights[i];
      if (u < acc) return static_cast<Flow>(i);
    }
    return Flow::Market;
  };

  // keep four levels a side so depletions always reveal a valid second level
  auto refill = [&]() {
    while (book.bids.size() < 4) {
      const Tick deepest = book.bids.rbegin()->first;
      if (deepest <= 3)
        throw ConfigInfeasible("prices walked to the bottom of the grid; raise initial_mid");
      book.bids[deepest - 1 - static_cast<Tick>(rng.bounded(2))] =
          rng.geometric_at_least_one(cfg.mean_volume);
    }
    while (book.asks.size() < 4) {
      const Tick deepest = book.asks.rbegin()->first;
      book.asks[deepest + 1 + static_cast<Tick>(rng.bounded(2))] =
          rng.geometric_at_least_one(cfg.mean_volume);
    }
  };

  std::int64_t ts = 0;
  for (std::int64_t i = 0; i < cfg.n_events; ++i) {
    ts += std::max<std::int64_t>(
        1, std::llround(rng.exponential(cfg.mean_interarrival_us)));

    Flow flow = draw_flow();
    const Tick spread = book.best_ask() - book.best_bid();
    if (flow == Flow::AddInside && spread < 2) flow = Flow::AddBest;

    LobEvent ev;
    ev.index = i;
    ev.timestamp_us = ts;

    switch (flow) {
      case Flow::AddBest:
      case Flow::AddSecond: {
        const bool buy = rng.bounded(2) == 0;
        const int level = flow == Flow::AddBest ? 1 : 2;
        const Volume v = rng.geometric_at_least_one(cfg.mean_volume);
        ev.side = buy ? Side::Buy : Side::Sell;
        ev.level = level;
        ev.signed_size = v;
        if (buy) {
          auto it = nth_level(book.bids, level);
          ev.price = it->first;
          it->second += v;
        } else {
          auto it = nth_level(book.asks, level);
          ev.price = it->first;
          it->second += v;
        }
        break;
      }
      case Flow::AddInside: {
        const bool buy = rng.bounded(2) == 0;
        const Tick b1 = book.best_bid();
        const Volume v = rng.geometric_at_least_one(cfg.mean_volume);
        const Tick price = b1 + 1 + static_cast<Tick>(rng.bounded(
                                        static_cast<std::uint64_t>(spread - 1)));
        ev.side = buy ? Side::Buy : Side::Sell;
        ev.level = 0;
        ev.signed_size = v;
        ev.price = price;
        (buy ? book.bids[price] : book.asks[price]) = v;
        break;
      }
      case Flow::CancelBest:
      case Flow::CancelSecond: {
        const bool buy = rng.bounded(2) == 0;
        const int level = flow == Flow::CancelBest ? 1 : 2;
        const Volume want = rng.geometric_at_least_one(cfg.mean_volume);
        ev.side = buy ? Side::Buy : Side::Sell;
        ev.level = level;
        if (buy) {
          auto it = nth_level(book.bids, level);
          const Volume v = std::min(want, it->second);
          ev.price = it->first;
          ev.signed_size = -v;
          if (v == it->second)
            book.bids.erase(it);
          else
            it->second -= v;
        } else {
          auto it = nth_level(book.asks, level);
          const Volume v = std::min(want, it->second);
          ev.price = it->first;
          ev.signed_size = -v;
          if (v == it->second)
            book.asks.erase(it);
          else
            it->second -= v;
        }
        break;
      }
      case Flow::Market: {
        // a market buy lifts the best ask, a market sell hits the best bid
        const LobState view = book.snapshot();
        const int imb = state_key(view).imbalance_sign;
        const double p_buy = 0.5 * (1.0 + cfg.imbalance_feedback * imb);
        const bool buy = rng.uniform01() < p_buy;
        const Volume want = rng.geometric_at_least_one(cfg.mean_volume);
        ev.level = 1;
        if (buy) {
          auto it = book.asks.begin();
          const Volume v = std::min(want, it->second);
          ev.side = Side::Sell;
          ev.price = it->first;
          ev.signed_size = -v;
          if (v == it->second)
            book.asks.erase(it);
          else
            it->second -= v;
        } else {
          auto it = book.bids.begin();
          const Volume v = std::min(want, it->second);
          ev.side = Side::Buy;
          ev.price = it->first;
          ev.signed_size = -v;
          if (v == it->second)
            book.bids.erase(it);
          else
            it->second -= v;
        }
        break;
      }
      case Flow::kCount:
        assert(false);
    }

    refill();
    ev.post_state = book.snapshot();
    log.events.push_back(ev);
  }
  return log;
}

DaySummary summarize(const EventLog& log) {
  DaySummary s;
  s.n_events = static_cast<std::int64_t>(log.events.size());
  for (EventIndex t = 0; t < s.n_events; ++t) {
    const LobEvent& ev = log.events[static_cast<std::size_t>(t)];
    const int bit =
        SignatureMask::bit_of(ev.signed_size < 0 ? -1 : +1, ev.level, ev.side);
    ++s.signature_counts[static_cast<std::size_t>(bit)];
    const MarketStateKey key = state_key(state_at(log, t));
    ++s.spread_histogram[key.spread];
    ++s.key_histogram[{key.imbalance_sign, key.spread}];
  }
  return s;
}

}  // namespace lobtt
