#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <map>

#include "helpers.hpp"
#include "lobtt/jump_index.hpp"
#include "lobtt/synth.hpp"

using namespace lobtt;
using lobtt_test::brute_candidates;
using lobtt_test::flat_state;
using lobtt_test::LogBuilder;

namespace {

// ten level-2 events on a book whose key stays (sign 0, spread 1); depth
// removals sit at known offsets: (-,2,B) at 3 and 8, (-,2,S) at 5 only
EventLog crafted_day() {
  LogBuilder b(flat_state());
  b.ev(Side::Buy, 2, 5, 10)     // 0
      .ev(Side::Buy, 2, 5, 10)    // 1
      .ev(Side::Buy, 2, 5, 10)    // 2
      .ev(Side::Buy, 2, -5, 10)   // 3
      .ev(Side::Buy, 2, 5, 10)    // 4
      .ev(Side::Sell, 2, -5, 13)  // 5
      .ev(Side::Buy, 2, 5, 10)    // 6
      .ev(Side::Sell, 2, 5, 13)   // 7
      .ev(Side::Buy, 2, -5, 10)   // 8
      .ev(Side::Buy, 2, 5, 10);   // 9
  return b.log;
}

const MarketStateKey kFlatKey{0, 1};

SignatureMask mask_of(std::initializer_list<EffectiveEvent> evs) {
  return signature_of(std::vector<EffectiveEvent>(evs));
}

GenConfig small_gen(std::uint64_t seed, std::int64_t n = 5000) {
  GenConfig g;
  g.seed = seed;
  g.n_events = n;
  return g;
}

}  // namespace

TEST_CASE("spread tolerance converts to tick shells") {
  JumpConfig cfg;
  cfg.delta_sigma_max = 0.3;
  CHECK(cfg.max_spread_shells(0.005) == 60);
  CHECK(cfg.max_spread_shells(0.007) == 43);  // 42.857... rounds up
  CHECK(cfg.max_spread_shells(0.3) == 1);
  cfg.delta_sigma_max = 0.0;
  CHECK(cfg.max_spread_shells(0.005) == 0);
}

TEST_CASE("occurrence masks match a direct window scan") {
  const EventLog log = generate_day(small_gen(21));
  const JumpConfig cfg;
  const JumpIndex idx = build_index(log, cfg);
  const EventIndex T = static_cast<EventIndex>(log.events.size());
  REQUIRE(idx.day_length == T);

  Rng rng(99);
  for (int i = 0; i < 100; ++i) {
    const EventIndex t = static_cast<EventIndex>(rng.bounded(static_cast<std::uint64_t>(T)));
    SignatureMask want;
    const EventIndex last = std::min<EventIndex>(t + cfg.t_next, T - 1);
    for (EventIndex j = t; j <= last; ++j)
      want.bits = static_cast<std::uint16_t>(
          want.bits | signature_of(log.events[static_cast<std::size_t>(j)]).bits);
    CHECK(idx.occurrence_masks[static_cast<std::size_t>(t)] == want);
  }

  // the last index sees only its own event
  CHECK(idx.occurrence_masks[static_cast<std::size_t>(T - 1)] ==
        signature_of(log.events[static_cast<std::size_t>(T - 1)]));

  for (int i = 0; i < 50; ++i) {
    const EventIndex t = static_cast<EventIndex>(rng.bounded(static_cast<std::uint64_t>(T)));
    const MarketStateKey key = state_key(state_at(log, t));
    CHECK(idx.sign_at[static_cast<std::size_t>(t)] == key.imbalance_sign);
    CHECK(idx.spread_at[static_cast<std::size_t>(t)] == key.spread);
  }
}

TEST_CASE("per-bucket superset counts agree with direct counting") {
  const EventLog log = generate_day(small_gen(5));
  const JumpIndex idx = build_index(log, JumpConfig{});
  bool found_counted = false;
  Rng rng(17);
  for (const auto& [key, bucket] : idx.buckets) {
    (void)key;
    if (bucket.superset_count.empty()) {
      CHECK(bucket.indices.size() < JumpIndex::kCountedBucketMin);
      continue;
    }
    found_counted = true;
    for (int trial = 0; trial < 8; ++trial) {
      const std::uint16_t required = static_cast<std::uint16_t>(rng.bounded(1u << 12));
      std::uint32_t direct = 0;
      for (EventIndex t : bucket.indices)
        if (idx.occurrence_masks[static_cast<std::size_t>(t)].covers(SignatureMask{required}))
          ++direct;
      CHECK(bucket.superset_count[required] == direct);
    }
  }
  CHECK(found_counted);
}

TEST_CASE("find_candidates equals the brute filter") {
  const EventLog log = generate_day(small_gen(31));
  const EventIndex T = static_cast<EventIndex>(log.events.size());

  for (const bool allow_past : {true, false}) {
    for (const double dsm : {0.005, 0.02, 0.3}) {
      JumpConfig cfg;
      cfg.delta_sigma_max = dsm;
      cfg.allow_past_jumps = allow_past;
      const JumpIndex idx = build_index(log, cfg);

      Rng rng(1000 + static_cast<std::uint64_t>(dsm * 1000) + (allow_past ? 1 : 0));
      for (int q = 0; q < 60; ++q) {
        const EventIndex at =
            static_cast<EventIndex>(rng.bounded(static_cast<std::uint64_t>(T)));
        MarketStateKey key = state_key(state_at(log, at));
        if (q % 4 == 0) key.spread += static_cast<Tick>(rng.bounded(4));  // off-grid spreads
        SignatureMask required;
        if (q % 2 == 0) {
          // subsample an actual window's mask
          required.bits = static_cast<std::uint16_t>(
              idx.occurrence_masks[static_cast<std::size_t>(at)].bits &
              static_cast<std::uint16_t>(rng.bounded(1u << 12)));
        } else {
          required.bits = static_cast<std::uint16_t>(rng.bounded(1u << 12)) &
                          static_cast<std::uint16_t>(rng.bounded(1u << 12));
        }
        const EventIndex t_now =
            static_cast<EventIndex>(rng.bounded(static_cast<std::uint64_t>(T)));
        CHECK(find_candidates(idx, key, required, t_now, cfg) ==
              brute_candidates(log, cfg, key, required, t_now));
      }
    }
  }
}

TEST_CASE("exclusion radius carves a symmetric hole") {
  const EventLog log = generate_day(small_gen(41, 800));
  JumpConfig cfg;
  cfg.exclusion_radius = 50;
  const JumpIndex idx = build_index(log, cfg);
  const EventIndex t_now = 400;
  const MarketStateKey key = state_key(state_at(log, t_now));
  const auto cands = find_candidates(idx, key, SignatureMask{}, t_now, cfg);
  CHECK_FALSE(cands.empty());
  for (EventIndex t : cands) CHECK(std::llabs(t - t_now) > 50);
  CHECK(cands == brute_candidates(log, cfg, key, SignatureMask{}, t_now));
}

TEST_CASE("select_jump is uniform over the candidate list") {
  const std::vector<EventIndex> cands{3, 8, 13, 21};
  std::map<EventIndex, int> hits;
  Rng rng(2024);
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto t = select_jump(cands, rng);
    REQUIRE(t.has_value());
    ++hits[*t];
  }
  REQUIRE(hits.size() == 4);
  for (const auto& [t, c] : hits) {
    (void)t;
    const double f = static_cast<double>(c) / n;
    CHECK(f >= 0.23);
    CHECK(f <= 0.27);
  }
  Rng rng2(1);
  CHECK_FALSE(select_jump({}, rng2).has_value());
}

TEST_CASE("advance after a jump waits for every required signature") {
  const EventLog log = crafted_day();
  const SignatureMask both =
      mask_of({EffectiveEvent{-1, 2, Side::Buy}, EffectiveEvent{-1, 2, Side::Sell}});
  CHECK(advance_after_jump(log, 0, both) == 5);  // (-,2,B) clears at 3, (-,2,S) at 5
  CHECK(advance_after_jump(log, 0, mask_of({EffectiveEvent{-1, 2, Side::Buy}})) == 3);
  CHECK(advance_after_jump(log, 3, mask_of({EffectiveEvent{-1, 2, Side::Buy}})) == 8);
  CHECK(advance_after_jump(log, 4, mask_of({EffectiveEvent{-1, 2, Side::Sell}})) == 5);
  CHECK(advance_after_jump(log, 2, SignatureMask{}) == 2);  // nothing to wait for
  // signatures that never occur after t' clamp to day end
  CHECK(advance_after_jump(log, 5, mask_of({EffectiveEvent{-1, 2, Side::Sell}})) == 10);
  CHECK(advance_after_jump(log, 0, mask_of({EffectiveEvent{+1, 1, Side::Buy}})) == 10);
}

TEST_CASE("fallback skips one recorded event per effective event") {
  CHECK(fallback_advance(100, 3, 5000) == 103);
  CHECK(fallback_advance(100, 0, 5000) == 100);
  CHECK(fallback_advance(4999, 4, 5000) == 5000);
}

TEST_CASE("sequential stepping applies the latency rule in place") {
  const EventLog log = crafted_day();
  Rng rng(1);
  JumpConfig jc;

  Clock clock{0, 0, LatencyConfig{LatencyMode::EventTicks, 4}};
  auto step = step_dynamics(DynamicsMode::Sequential, clock, log, nullptr, kFlatKey,
                            SignatureMask{}, jc, rng);
  REQUIRE(step.has_value());
  CHECK(step->landing == 0);
  CHECK(step->continuation_start == 0);
  CHECK(step->next_activation == 4);
  CHECK_FALSE(step->jumped);
  CHECK_FALSE(step->fell_back);

  clock.t = 8;  // 8 + 4 clamps to the 10-event day
  step = step_dynamics(DynamicsMode::Sequential, clock, log, nullptr, kFlatKey,
                       SignatureMask{}, jc, rng);
  REQUIRE(step.has_value());
  CHECK(step->next_activation == 10);

  clock.t = 10;
  CHECK_FALSE(step_dynamics(DynamicsMode::Sequential, clock, log, nullptr, kFlatKey,
                            SignatureMask{}, jc, rng)
                  .has_value());
}

TEST_CASE("wall-clock latency waits for the timestamp") {
  const EventLog log = crafted_day();  // timestamps 10, 20, ..., 100
  Rng rng(1);
  JumpConfig jc;
  Clock clock{0, 0, LatencyConfig{LatencyMode::WallClock, 25}};
  auto step = step_dynamics(DynamicsMode::Sequential, clock, log, nullptr, kFlatKey,
                            SignatureMask{}, jc, rng);
  REQUIRE(step.has_value());
  CHECK(step->next_activation == 3);  // first timestamp >= 10 + 25

  clock.latency.value = 1000;
  step = step_dynamics(DynamicsMode::Sequential, clock, log, nullptr, kFlatKey,
                       SignatureMask{}, jc, rng);
  REQUIRE(step.has_value());
  CHECK(step->next_activation == 10);
}

TEST_CASE("a jump with one consistent index is deterministic") {
  const EventLog log = crafted_day();
  JumpConfig jc;
  jc.t_next = 2;
  jc.exclusion_radius = 0;
  // only the window [3, 5] holds both removals
  const SignatureMask both =
      mask_of({EffectiveEvent{-1, 2, Side::Buy}, EffectiveEvent{-1, 2, Side::Sell}});

  for (const bool allow_past : {true, false}) {
    jc.allow_past_jumps = allow_past;
    const JumpIndex idx = build_index(log, jc);
    CHECK(find_candidates(idx, kFlatKey, both, 0, jc) == std::vector<EventIndex>{3});

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      Clock clock{0, 0, LatencyConfig{LatencyMode::EventTicks, 2}};
      const auto step = step_dynamics(DynamicsMode::Jump, clock, log, &idx, kFlatKey,
                                      both, jc, rng);
      REQUIRE(step.has_value());
      CHECK(step->jumped);
      CHECK_FALSE(step->fell_back);
      CHECK(step->landing == 3);
      CHECK(step->continuation_start == 8);  // (-,2,S) recurs at 5, (-,2,B) at 8
      CHECK(step->next_activation == 10);
    }
  }
}

TEST_CASE("jump selection is uniform over the consistent set") {
  const EventLog log = crafted_day();
  JumpConfig jc;
  jc.t_next = 2;
  jc.exclusion_radius = 1;  // at t_now = 8 this drops windows 7 and 8
  const SignatureMask buy_removal = mask_of({EffectiveEvent{-1, 2, Side::Buy}});
  const JumpIndex idx = build_index(log, jc);
  CHECK(find_candidates(idx, kFlatKey, buy_removal, 8, jc) ==
        std::vector<EventIndex>{1, 2, 3, 6});

  std::map<EventIndex, int> hits;
  const int n = 9000;
  for (int i = 0; i < n; ++i) {
    Rng rng(static_cast<std::uint64_t>(i) + 7777);
    Clock clock{8, 0, LatencyConfig{LatencyMode::EventTicks, 2}};
    const auto step =
        step_dynamics(DynamicsMode::Jump, clock, log, &idx, kFlatKey, buy_removal, jc, rng);
    REQUIRE(step.has_value());
    REQUIRE(step->jumped);
    ++hits[step->landing];
  }
  REQUIRE(hits.size() == 4);
  for (const auto& [t, c] : hits) {
    CHECK((t == 1 || t == 2 || t == 3 || t == 6));
    const double f = static_cast<double>(c) / n;
    CHECK(f >= 0.22);
    CHECK(f <= 0.28);
  }
}

TEST_CASE("stepped jumps only land on brute-filter candidates") {
  const EventLog log = generate_day(small_gen(77));
  const EventIndex T = static_cast<EventIndex>(log.events.size());

  for (const bool allow_past : {true, false}) {
    JumpConfig jc;
    jc.allow_past_jumps = allow_past;
    const JumpIndex idx = build_index(log, jc);

    Rng qrng(4 + (allow_past ? 100 : 0));
    for (int q = 0; q < 25; ++q) {
      const EventIndex at = static_cast<EventIndex>(qrng.bounded(static_cast<std::uint64_t>(T)));
      const MarketStateKey key = state_key(state_at(log, at));
      SignatureMask required;
      required.bits = static_cast<std::uint16_t>(
          idx.occurrence_masks[static_cast<std::size_t>(at)].bits &
          static_cast<std::uint16_t>(qrng.bounded(1u << 12)));
      const EventIndex t_now =
          static_cast<EventIndex>(qrng.bounded(static_cast<std::uint64_t>(T)));
      const auto cands = find_candidates(idx, key, required, t_now, jc);

      for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(seed * 31 + 5);
        Clock clock{t_now, 0, LatencyConfig{LatencyMode::EventTicks, 10}};
        const auto step =
            step_dynamics(DynamicsMode::Jump, clock, log, &idx, key, required, jc, rng);
        if (cands.empty()) {
          if (step) CHECK(step->fell_back);
          continue;
        }
        if (!step) continue;  // landing near day end can exhaust the continuation
        CHECK(step->jumped);
        CHECK(std::find(cands.begin(), cands.end(), step->landing) != cands.end());
      }
    }
  }
}

TEST_CASE("a jump with no candidates falls back") {
  const EventLog log = crafted_day();
  JumpConfig jc;
  jc.t_next = 2;
  jc.exclusion_radius = 2;
  // level-1 signatures never occur in the crafted day
  const SignatureMask impossible =
      mask_of({EffectiveEvent{+1, 1, Side::Buy}, EffectiveEvent{-1, 1, Side::Sell}});

  for (const bool allow_past : {true, false}) {
    jc.allow_past_jumps = allow_past;
    const JumpIndex idx = build_index(log, jc);
    CHECK(find_candidates(idx, kFlatKey, impossible, 2, jc).empty());

    Rng rng(3);
    Clock clock{2, 0, LatencyConfig{LatencyMode::EventTicks, 3}};
    const auto step =
        step_dynamics(DynamicsMode::Jump, clock, log, &idx, kFlatKey, impossible, jc, rng);
    REQUIRE(step.has_value());
    CHECK(step->fell_back);
    CHECK_FALSE(step->jumped);
    CHECK(step->landing == 2);
    CHECK(step->continuation_start == 4);  // skipped one index per required signature
    CHECK(step->next_activation == 7);
  }
}

TEST_CASE("an empty requirement jumps anywhere with the same key") {
  const EventLog log = crafted_day();
  JumpConfig jc;
  jc.exclusion_radius = 1;
  const JumpIndex idx = build_index(log, jc);

  const auto cands = find_candidates(idx, kFlatKey, SignatureMask{}, 4, jc);
  CHECK(cands == std::vector<EventIndex>{0, 1, 2, 6, 7, 8, 9});

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Clock clock{4, 0, LatencyConfig{LatencyMode::EventTicks, 1}};
    const auto step = step_dynamics(DynamicsMode::Jump, clock, log, &idx, kFlatKey,
                                    SignatureMask{}, jc, rng);
    REQUIRE(step.has_value());
    CHECK(step->jumped);
    CHECK(step->continuation_start == step->landing);
    CHECK(std::find(cands.begin(), cands.end(), step->landing) != cands.end());
  }
}

TEST_CASE("index caches round-trip and reject stale inputs") {
  const EventLog log = generate_day(small_gen(55, 1200));
  const JumpConfig cfg;
  const JumpIndex idx = build_index(log, cfg);
  const std::string path = "tmp_index_cache.bin";
  write_index_cache(idx, log, path);

  SUBCASE("round trip") {
    const auto back = read_index_cache(path, log, cfg);
    REQUIRE(back.has_value());
    CHECK(back->t_next == idx.t_next);
    CHECK(back->day_length == idx.day_length);
    CHECK(back->tick_size == idx.tick_size);
    CHECK(back->sign_at == idx.sign_at);
    CHECK(back->spread_at == idx.spread_at);
    CHECK(back->occurrence_masks == idx.occurrence_masks);
    CHECK(back->by_spread == idx.by_spread);
    CHECK(back->by_imbalance_sign == idx.by_imbalance_sign);
    REQUIRE(back->buckets.size() == idx.buckets.size());
    for (const auto& [key, bucket] : idx.buckets) {
      const auto it = back->buckets.find(key);
      REQUIRE(it != back->buckets.end());
      CHECK(it->second.indices == bucket.indices);
      CHECK(it->second.superset_count == bucket.superset_count);
    }
  }

  SUBCASE("config with a different window is rejected") {
    JumpConfig other = cfg;
    other.t_next = cfg.t_next + 1;
    CHECK_FALSE(read_index_cache(path, log, other).has_value());
  }

  SUBCASE("modified log content is rejected") {
    EventLog other = log;
    other.events[100].signed_size += 1;
    CHECK_FALSE(read_index_cache(path, other, cfg).has_value());
  }

  SUBCASE("renamed day is rejected") {
    EventLog other = log;
    other.day_id = "someone-else";
    CHECK_FALSE(read_index_cache(path, other, cfg).has_value());
  }

  SUBCASE("truncated file is rejected") {
    std::ifstream in(path, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out(path, std::ios::binary);
    out.write(data.data(), static_cast<std::streamsize>(data.size() / 2));
    out.close();
    CHECK_FALSE(read_index_cache(path, log, cfg).has_value());
  }

  SUBCASE("missing file is rejected") {
    CHECK_FALSE(read_index_cache("no_such_cache.bin", log, cfg).has_value());
  }

  std::remove(path.c_str());
}
