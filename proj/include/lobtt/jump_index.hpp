#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lobtt/book.hpp"
#include "lobtt/effective_events.hpp"
#include "lobtt/rng.hpp"

namespace lobtt {

struct JumpConfig {
  EventIndex t_next = 20;        // how far ahead the required signatures must occur
  double delta_sigma_max = 0.3;  // spread tolerance in currency units
  EventIndex exclusion_radius = 10;  // never land within this many indices of now
  bool allow_past_jumps = true;

  // Spread shells 0 .. max-1 satisfy |shell| * tick_size < delta_sigma_max.
  Tick max_spread_shells(double tick_size) const;
};

// Per-day lookup answering: which indices t' see market key (sign, spread) and
// have all required signatures among events [t', t'+t_next]?
//
// by_imbalance_sign and by_spread are the two public dictionaries; queries walk
// the shorter of the two lists for a key and test the other half plus the
// occurrence mask per index. buckets adds a joint (sign, spread) view with
// exact superset counts over the 4096 possible masks so the replay loop can
// pick a uniform candidate without materializing the list.
struct JumpIndex {
  EventIndex t_next = 20;
  double tick_size = 0.0;
  EventIndex day_length = 0;  // number of events

  std::array<std::vector<EventIndex>, 3> by_imbalance_sign;  // slot = sign + 1
  std::map<Tick, std::vector<EventIndex>> by_spread;
  std::vector<SignatureMask> occurrence_masks;  // OR over [t, t+t_next], day-end truncated

  std::vector<std::int8_t> sign_at;  // per-index key halves, for O(1) membership tests
  std::vector<Tick> spread_at;

  struct Bucket {
    std::vector<EventIndex> indices;
    // superset_count[m] = how many indices in this bucket have mask covering m.
    // Built only for buckets of at least kCountedBucketMin indices; small
    // buckets are cheap to scan directly.
    std::vector<std::uint32_t> superset_count;
  };
  static constexpr std::size_t kCountedBucketMin = 96;
  std::map<std::pair<int, Tick>, Bucket> buckets;
};

// Builds every dictionary in one pass over the day (O(T) masks via a sliding
// bit-count window, then an O(4096 * 12) subset-sum transform per bucket).
JumpIndex build_index(const EventLog& log, const JumpConfig& cfg);

// All indices t' with key_at(t') == key, occurrence mask covering `required`,
// |t' - t_now| > exclusion_radius (and t' > t_now when past jumps are off),
// drawn from the nearest non-empty spread shell within the tolerance. Sorted
// ascending.
std::vector<EventIndex> find_candidates(const JumpIndex& index, const MarketStateKey& key,
                                        SignatureMask required, EventIndex t_now,
                                        const JumpConfig& cfg);

// Uniform choice; nullopt on an empty list.
std::optional<EventIndex> select_jump(const std::vector<EventIndex>& candidates, Rng& rng);

// Smallest index t' + n whose events (t', t'+n] cover every required
// signature; t' itself when required is empty. Clamped to day end.
EventIndex advance_after_jump(const EventLog& log, EventIndex t_prime,
                              SignatureMask required);

// Where the cursor goes when no consistent continuation exists: skip as many
// recorded events as the agent produced effective ones. Clamped to day end.
EventIndex fallback_advance(EventIndex t_now, int n_effective_events,
                            EventIndex day_length);

enum class DynamicsMode { Sequential, Jump };

enum class LatencyMode { EventTicks, WallClock };

struct LatencyConfig {
  LatencyMode mode = LatencyMode::EventTicks;
  std::int64_t value = 10;  // event indices, or microseconds for WallClock
};

struct Clock {
  EventIndex t = 0;       // current replay index
  std::int64_t u = 0;     // activations so far
  LatencyConfig latency;
};

struct StepResult {
  EventIndex landing;             // chosen t' under Jump, t under Sequential/fallback
  EventIndex continuation_start;  // rewards accrue from here ...
  EventIndex next_activation;     // ... up to here (exclusive), <= day length
  bool jumped = false;
  bool fell_back = false;
};

// Resolves one activation at clock.t. Sequential ignores the index and applies
// the latency rule in place. Jump picks a uniform consistent candidate, runs
// advance_after_jump, and falls back to fallback_advance when no candidate
// exists; the latency rule then runs from the continuation start. nullopt
// signals day exhaustion. `index` may be null in Sequential mode.
std::optional<StepResult> step_dynamics(DynamicsMode mode, const Clock& clock,
                                        const EventLog& log, const JumpIndex* index,
                                        const MarketStateKey& key_now,
                                        SignatureMask required, const JumpConfig& cfg,
                                        Rng& rng);

// Binary sidecar keyed by (day_id, t_next, day length, content hash).
// read_index_cache returns nullopt on any mismatch so callers rebuild.
void write_index_cache(const JumpIndex& index, const EventLog& log,
                       const std::string& path);
std::optional<JumpIndex> read_index_cache(const std::string& path, const EventLog& log,
                                          const JumpConfig& cfg);

std::uint64_t log_content_hash(const EventLog& log);

}  // namespace lobtt
