#include "lobtt/jump_index.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string_view>

namespace lobtt {

Tick JumpConfig::max_spread_shells(double tick_size) const {
  if (delta_sigma_max <= 0.0 || tick_size <= 0.0) return 0;
  // strict |shell * tick| < delta_sigma_max; the epsilon absorbs the division's
  // rounding when the ratio is an exact integer
  return static_cast<Tick>(std::ceil(delta_sigma_max / tick_size - 1e-9));
}

// ---------------------------------------------------------------------------
// build
// ---------------------------------------------------------------------------

namespace {

// Dictionaries and per-bucket superset counts from the filled per-index
// arrays. Shared by build_index and the cache loader.
void finish_index(JumpIndex& idx) {
  const EventIndex T = idx.day_length;
  for (EventIndex t = 0; t < T; ++t) {
    const int sign = idx.sign_at[static_cast<std::size_t>(t)];
    const Tick spread = idx.spread_at[static_cast<std::size_t>(t)];
    idx.by_imbalance_sign[static_cast<std::size_t>(sign + 1)].push_back(t);
    idx.by_spread[spread].push_back(t);
    idx.buckets[{sign, spread}].indices.push_back(t);
  }
  for (auto& [key, bucket] : idx.buckets) {
    (void)key;
    if (bucket.indices.size() < JumpIndex::kCountedBucketMin) continue;
    std::vector<std::uint32_t> f(1u << SignatureMask::kBits, 0);
    for (EventIndex t : bucket.indices)
      ++f[idx.occurrence_masks[static_cast<std::size_t>(t)].bits];
    // subset-sum transform: f[m] becomes the number of indices whose mask is a
    // superset of m
    for (int b = 0; b < SignatureMask::kBits; ++b) {
      const std::size_t bit = 1u << b;
      for (std::size_t m = 0; m < f.size(); ++m)
        if (!(m & bit)) f[m] += f[m | bit];
    }
    bucket.superset_count = std::move(f);
  }
}

}  // namespace

JumpIndex build_index(const EventLog& log, const JumpConfig& cfg) {
  assert(cfg.t_next >= 0);
  JumpIndex idx;
  idx.t_next = cfg.t_next;
  idx.tick_size = log.tick_size;
  const EventIndex T = static_cast<EventIndex>(log.events.size());
  idx.day_length = T;
  idx.sign_at.resize(static_cast<std::size_t>(T));
  idx.spread_at.resize(static_cast<std::size_t>(T));
  idx.occurrence_masks.resize(static_cast<std::size_t>(T));

  // occurrence masks over [t, t+t_next]: sliding per-bit counts, walked backward
  std::array<std::int32_t, SignatureMask::kBits> cnt{};
  auto bump = [&cnt](const LobEvent& ev, int delta) {
    const int b = SignatureMask::bit_of(ev.signed_size < 0 ? -1 : +1, ev.level, ev.side);
    cnt[static_cast<std::size_t>(b)] += delta;
  };
  for (EventIndex t = T - 1; t >= 0; --t) {
    bump(log.events[static_cast<std::size_t>(t)], +1);
    const EventIndex drop = t + cfg.t_next + 1;
    if (drop <= T - 1) bump(log.events[static_cast<std::size_t>(drop)], -1);
    std::uint16_t m = 0;
    for (int b = 0; b < SignatureMask::kBits; ++b)
      if (cnt[static_cast<std::size_t>(b)] > 0) m = static_cast<std::uint16_t>(m | (1u << b));
    idx.occurrence_masks[static_cast<std::size_t>(t)].bits = m;
  }

  for (EventIndex t = 0; t < T; ++t) {
    const MarketStateKey key = state_key(state_at(log, t));
    idx.sign_at[static_cast<std::size_t>(t)] = static_cast<std::int8_t>(key.imbalance_sign);
    idx.spread_at[static_cast<std::size_t>(t)] = key.spread;
  }
  finish_index(idx);
  return idx;
}

// ---------------------------------------------------------------------------
// queries
// ---------------------------------------------------------------------------

namespace {

int shell_spreads(Tick spread, Tick d, std::array<Tick, 2>& out) {
  int n = 0;
  if (spread - d >= 1) out[static_cast<std::size_t>(n++)] = spread - d;
  if (d > 0) out[static_cast<std::size_t>(n++)] = spread + d;
  return n;
}

bool excluded(EventIndex t, EventIndex t_now, EventIndex radius) {
  return std::llabs(t - t_now) <= radius;
}

// Exact number of candidates a bucket contributes, using the superset table
// when present (the exclusion window is small enough to probe directly).
std::int64_t bucket_count(const JumpIndex& idx, const JumpIndex::Bucket& bucket, int sign,
                          Tick spread, SignatureMask required, EventIndex t_now,
                          EventIndex radius) {
  if (!bucket.superset_count.empty()) {
    std::int64_t m = bucket.superset_count[required.bits];
    const EventIndex lo = std::max<EventIndex>(0, t_now - radius);
    const EventIndex hi = std::min<EventIndex>(idx.day_length - 1, t_now + radius);
    for (EventIndex t = lo; t <= hi; ++t) {
      const std::size_t i = static_cast<std::size_t>(t);
      if (idx.sign_at[i] == sign && idx.spread_at[i] == spread &&
          idx.occurrence_masks[i].covers(required))
        --m;
    }
    return m;
  }
  std::int64_t m = 0;
  for (EventIndex t : bucket.indices)
    if (!excluded(t, t_now, radius) &&
        idx.occurrence_masks[static_cast<std::size_t>(t)].covers(required))
      ++m;
  return m;
}

// Uniform candidate without materializing the list: exact shell counts, then
// rejection sampling over the bucket's raw indices; a deterministic ordered
// pick covers the rare low-acceptance case. Distribution-identical to
// select_jump over find_candidates' output. Requires allow_past_jumps.
std::optional<EventIndex> select_candidate(const JumpIndex& idx, const MarketStateKey& key,
                                           SignatureMask required, EventIndex t_now,
                                           const JumpConfig& cfg, Rng& rng) {
  assert(cfg.allow_past_jumps);
  const Tick max_d = cfg.max_spread_shells(idx.tick_size);
  const EventIndex radius = cfg.exclusion_radius;
  std::array<Tick, 2> sp{};
  for (Tick d = 0; d < max_d; ++d) {
    const int n = shell_spreads(key.spread, d, sp);
    const JumpIndex::Bucket* pb[2] = {nullptr, nullptr};
    std::int64_t pcnt[2] = {0, 0};
    int np = 0;
    std::int64_t total = 0, plen = 0;
    for (int i = 0; i < n; ++i) {
      auto it = idx.buckets.find({key.imbalance_sign, sp[static_cast<std::size_t>(i)]});
      if (it == idx.buckets.end()) continue;
      const std::int64_t c = bucket_count(idx, it->second, key.imbalance_sign,
                                          sp[static_cast<std::size_t>(i)], required, t_now,
                                          radius);
      pb[np] = &it->second;
      pcnt[np] = c;
      ++np;
      total += c;
      plen += static_cast<std::int64_t>(it->second.indices.size());
    }
    if (total == 0) continue;

    for (int iter = 0; iter < 64; ++iter) {
      std::int64_t pos = static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(plen)));
      const JumpIndex::Bucket* b = pb[0];
      if (np == 2 && pos >= static_cast<std::int64_t>(pb[0]->indices.size())) {
        pos -= static_cast<std::int64_t>(pb[0]->indices.size());
        b = pb[1];
      }
      const EventIndex t = b->indices[static_cast<std::size_t>(pos)];
      if (!excluded(t, t_now, radius) &&
          idx.occurrence_masks[static_cast<std::size_t>(t)].covers(required))
        return t;
    }

    std::int64_t j = static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(total)));
    for (int i = 0; i < np; ++i) {
      if (j >= pcnt[i]) {
        j -= pcnt[i];
        continue;
      }
      for (const EventIndex t : pb[i]->indices) {
        if (excluded(t, t_now, radius) ||
            !idx.occurrence_masks[static_cast<std::size_t>(t)].covers(required))
          continue;
        if (j == 0) return t;
        --j;
      }
    }
    assert(false && "shell counts disagree with bucket contents");
    return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

std::vector<EventIndex> find_candidates(const JumpIndex& index, const MarketStateKey& key,
                                        SignatureMask required, EventIndex t_now,
                                        const JumpConfig& cfg) {
  const Tick max_d = cfg.max_spread_shells(index.tick_size);
  const auto& sign_list =
      index.by_imbalance_sign[static_cast<std::size_t>(key.imbalance_sign + 1)];
  std::vector<EventIndex> out;
  std::array<Tick, 2> sp{};
  for (Tick d = 0; d < max_d; ++d) {
    const int n = shell_spreads(key.spread, d, sp);
    for (int i = 0; i < n; ++i) {
      const Tick sigma = sp[static_cast<std::size_t>(i)];
      auto it = index.by_spread.find(sigma);
      if (it == index.by_spread.end()) continue;
      const auto& spread_list = it->second;
      // walk the shorter dictionary list, test the other half via the
      // per-index arrays
      const bool walk_spread = spread_list.size() <= sign_list.size();
      const auto& walk = walk_spread ? spread_list : sign_list;
      for (const EventIndex t : walk) {
        const std::size_t ti = static_cast<std::size_t>(t);
        if (walk_spread ? (index.sign_at[ti] != key.imbalance_sign)
                        : (index.spread_at[ti] != sigma))
          continue;
        if (!index.occurrence_masks[ti].covers(required)) continue;
        if (excluded(t, t_now, cfg.exclusion_radius)) continue;
        if (!cfg.allow_past_jumps && t <= t_now) continue;
        out.push_back(t);
      }
    }
    if (!out.empty()) {
      std::sort(out.begin(), out.end());
      return out;
    }
  }
  return out;
}

std::optional<EventIndex> select_jump(const std::vector<EventIndex>& candidates, Rng& rng) {
  if (candidates.empty()) return std::nullopt;
  return candidates[static_cast<std::size_t>(rng.bounded(candidates.size()))];
}

EventIndex advance_after_jump(const EventLog& log, EventIndex t_prime,
                              SignatureMask required) {
  const EventIndex T = static_cast<EventIndex>(log.events.size());
  std::uint16_t missing = required.bits;
  EventIndex j = t_prime;
  while (missing != 0) {
    ++j;
    if (j >= T) return T;
    missing = static_cast<std::uint16_t>(
        missing & ~signature_of(log.events[static_cast<std::size_t>(j)]).bits);
  }
  return j;
}

EventIndex fallback_advance(EventIndex t_now, int n_effective_events,
                            EventIndex day_length) {
  return std::min<EventIndex>(t_now + n_effective_events, day_length);
}

std::optional<StepResult> step_dynamics(DynamicsMode mode, const Clock& clock,
                                        const EventLog& log, const JumpIndex* index,
                                        const MarketStateKey& key_now,
                                        SignatureMask required, const JumpConfig& cfg,
                                        Rng& rng) {
  const EventIndex T = static_cast<EventIndex>(log.events.size());
  const EventIndex t = clock.t;
  if (t >= T) return std::nullopt;

  StepResult res;
  if (mode == DynamicsMode::Sequential) {
    res.landing = t;
    res.continuation_start = t;
  } else {
    assert(index != nullptr);
    std::optional<EventIndex> target;
    if (cfg.allow_past_jumps) {
      target = select_candidate(*index, key_now, required, t, cfg, rng);
    } else {
      target = select_jump(find_candidates(*index, key_now, required, t, cfg), rng);
    }
    if (target) {
      res.landing = *target;
      res.continuation_start = advance_after_jump(log, *target, required);
      res.jumped = true;
    } else {
      res.landing = t;
      res.continuation_start = fallback_advance(t, required.count(), T);
      res.fell_back = true;
    }
  }
  if (res.continuation_start >= T) return std::nullopt;

  assert(clock.latency.value >= 1);
  if (clock.latency.mode == LatencyMode::EventTicks) {
    res.next_activation = std::min<EventIndex>(res.continuation_start + clock.latency.value, T);
  } else {
    const std::int64_t target_ts =
        log.events[static_cast<std::size_t>(res.continuation_start)].timestamp_us +
        clock.latency.value;
    auto first = log.events.begin() + res.continuation_start + 1;
    auto it = std::lower_bound(
        first, log.events.end(), target_ts,
        [](const LobEvent& e, std::int64_t v) { return e.timestamp_us < v; });
    res.next_activation =
        it == log.events.end() ? T : static_cast<EventIndex>(it - log.events.begin());
  }
  return res;
}

// ---------------------------------------------------------------------------
// cache sidecar
// ---------------------------------------------------------------------------

namespace {

constexpr char kCacheMagic[4] = {'L', 'T', 'J', 'X'};
constexpr std::uint32_t kCacheVersion = 1;

void put_u16(std::string& b, std::uint16_t v) {
  for (int i = 0; i < 2; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct ByteReader {
  const unsigned char* p;
  const unsigned char* end;

  bool need(std::size_t n) const { return static_cast<std::size_t>(end - p) >= n; }
  std::uint16_t u16() {
    std::uint16_t v = 0;
    for (int i = 0; i < 2; ++i) v = static_cast<std::uint16_t>(v | (std::uint16_t{*p++} << (8 * i)));
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{*p++} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{*p++} << (8 * i);
    return v;
  }
};

}  // namespace

std::uint64_t log_content_hash(const EventLog& log) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  auto mix_state = [&](const LobState& s) {
    mix(static_cast<std::uint64_t>(s.b1));
    mix(static_cast<std::uint64_t>(s.vb1));
    mix(static_cast<std::uint64_t>(s.b2));
    mix(static_cast<std::uint64_t>(s.vb2));
    mix(static_cast<std::uint64_t>(s.c1));
    mix(static_cast<std::uint64_t>(s.vs1));
    mix(static_cast<std::uint64_t>(s.c2));
    mix(static_cast<std::uint64_t>(s.vs2));
  };
  mix(fnv1a64(log.day_id));
  mix(std::bit_cast<std::uint64_t>(log.tick_size));
  mix(log.events.size());
  mix_state(log.initial_state);
  for (const LobEvent& ev : log.events) {
    mix(static_cast<std::uint64_t>(ev.timestamp_us));
    mix((static_cast<std::uint64_t>(ev.level) << 8) |
        static_cast<std::uint64_t>(side_char(ev.side)));
    mix(static_cast<std::uint64_t>(ev.signed_size));
    mix(static_cast<std::uint64_t>(ev.price));
    mix_state(ev.post_state);
  }
  return h;
}

void write_index_cache(const JumpIndex& index, const EventLog& log,
                       const std::string& path) {
  std::string b;
  b.reserve(64 + static_cast<std::size_t>(index.day_length) * 11);
  b.append(kCacheMagic, 4);
  put_u32(b, kCacheVersion);
  put_u64(b, static_cast<std::uint64_t>(index.t_next));
  put_u64(b, std::bit_cast<std::uint64_t>(index.tick_size));
  put_u64(b, static_cast<std::uint64_t>(index.day_length));
  put_u64(b, log_content_hash(log));
  put_u32(b, static_cast<std::uint32_t>(log.day_id.size()));
  b += log.day_id;
  for (EventIndex t = 0; t < index.day_length; ++t) {
    const std::size_t i = static_cast<std::size_t>(t);
    b.push_back(static_cast<char>(index.sign_at[i]));
    put_u64(b, static_cast<std::uint64_t>(index.spread_at[i]));
    put_u16(b, index.occurrence_masks[i].bits);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(b.data(), static_cast<std::streamsize>(b.size()));
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::optional<JumpIndex> read_index_cache(const std::string& path, const EventLog& log,
                                          const JumpConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ByteReader r{reinterpret_cast<const unsigned char*>(data.data()),
               reinterpret_cast<const unsigned char*>(data.data()) + data.size()};

  if (!r.need(4 + 4 + 8 * 4 + 4)) return std::nullopt;
  if (std::memcmp(r.p, kCacheMagic, 4) != 0) return std::nullopt;
  r.p += 4;
  if (r.u32() != kCacheVersion) return std::nullopt;

  JumpIndex idx;
  idx.t_next = static_cast<EventIndex>(r.u64());
  idx.tick_size = std::bit_cast<double>(r.u64());
  idx.day_length = static_cast<EventIndex>(r.u64());
  const std::uint64_t hash = r.u64();
  const std::uint32_t id_len = r.u32();

  if (idx.t_next != cfg.t_next) return std::nullopt;
  if (std::bit_cast<std::uint64_t>(idx.tick_size) !=
      std::bit_cast<std::uint64_t>(log.tick_size))
    return std::nullopt;
  if (idx.day_length != static_cast<EventIndex>(log.events.size())) return std::nullopt;
  if (hash != log_content_hash(log)) return std::nullopt;
  if (!r.need(id_len)) return std::nullopt;
  if (std::string_view(reinterpret_cast<const char*>(r.p), id_len) != log.day_id)
    return std::nullopt;
  r.p += id_len;
  if (!r.need(static_cast<std::size_t>(idx.day_length) * 11)) return std::nullopt;

  idx.sign_at.resize(static_cast<std::size_t>(idx.day_length));
  idx.spread_at.resize(static_cast<std::size_t>(idx.day_length));
  idx.occurrence_masks.resize(static_cast<std::size_t>(idx.day_length));
  for (EventIndex t = 0; t < idx.day_length; ++t) {
    const std::size_t i = static_cast<std::size_t>(t);
    idx.sign_at[i] = static_cast<std::int8_t>(*r.p++);
    idx.spread_at[i] = static_cast<Tick>(r.u64());
    idx.occurrence_masks[i].bits = r.u16();
  }
  finish_index(idx);
  return idx;
}

}  // namespace lobtt
