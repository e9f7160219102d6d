#pragma once

#include <array>
#include <map>
#include <string>

#include "lobtt/book.hpp"
#include "lobtt/effective_events.hpp"

namespace lobtt {

class ConfigInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Zero-intelligence flow with one deliberate regularity: market-order sides
// lean toward the queue-imbalance sign, so the imbalance carries genuine
// predictive content. The generator keeps at least four price levels per side
// internally and emits the two-level view, so depletions always reveal a valid
// second level.
struct GenConfig {
  std::uint64_t seed = 1;
  std::string day_id = "synth-000";
  std::int64_t n_events = 200000;
  double tick_size = 0.005;
  Tick initial_mid = 8000;            // ticks; the day opens with spread 2
  double mean_volume = 120.0;         // geometric order sizes, >= 1
  double mean_interarrival_us = 150.0;

  // relative arrival weights
  double w_add_best = 1.0;     // join the best level
  double w_add_second = 0.8;   // join the second level
  double w_add_inside = 0.35;  // post a new best inside the spread
  double w_cancel_best = 0.7;
  double w_cancel_second = 0.6;
  double w_market = 0.5;       // remove from the opposite best

  // in [0, 1]: P(market buy) = (1 + coeff * imbalance_sign) / 2
  double imbalance_feedback = 0.4;
};

// Throws ConfigInfeasible on degenerate parameters. The result always passes
// validate_log.
EventLog generate_day(const GenConfig& cfg);

struct DaySummary {
  std::int64_t n_events = 0;
  // per signature bit (see SignatureMask layout)
  std::array<std::int64_t, SignatureMask::kBits> signature_counts{};
  std::map<Tick, std::int64_t> spread_histogram;  // spread before each event
  std::map<std::pair<int, Tick>, std::int64_t> key_histogram;
};

DaySummary summarize(const EventLog& log);

}  // namespace lobtt
