#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lobtt/book.hpp"
#include "lobtt/rng.hpp"

namespace lobtt {

// Dense tabular Q function, row-major over (state, action). Kept generic so
// sanity tests can drive it on toy MDPs; the market encoding lives in
// AgentState below.
struct QTable {
  int n_states = 0;
  int n_actions = 0;
  double beta = 0.001;  // learning rate
  double gamma = 0.97;  // discount
  std::vector<double> values;

  static QTable make(int n_states, int n_actions, double beta, double gamma);

  double& at(int s, int a) { return values[static_cast<std::size_t>(s) * n_actions + a]; }
  double at(int s, int a) const {
    return values[static_cast<std::size_t>(s) * n_actions + a];
  }

  // i.i.d. uniform in [-range, range]
  void init_uniform(double range, Rng& rng);
};

// Lowest index wins ties.
int argmax_action(const QTable& q, int s);

double max_value(const QTable& q, int s);

// Q(s,a) <- (1 - beta) Q(s,a) + beta (r + gamma max_a' Q(s',a'))
void q_update(QTable& q, int s, int a, double r, int s_next);

struct ExplorationSchedule {
  double epsilon = 0.2;
  double decay = 0.9999;  // applied once per update

  void step() { epsilon *= decay; }
};

// Epsilon-greedy: one uniform draw decides explore/exploit, exploration picks
// uniformly over all actions.
int select_action(const QTable& q, int s, double epsilon, Rng& rng);

// Market-facing state: inventory sign, queue-imbalance sign, and the spread
// clamped to spread_cap buckets (1..cap).
struct AgentState {
  int inventory_sign = 0;
  int imbalance_sign = 0;
  int spread_bucket = 1;
};

inline AgentState make_agent_state(Volume position, const LobState& book, int spread_cap) {
  const Tick sp = spread_ticks(book);
  return AgentState{position > 0 ? 1 : position < 0 ? -1 : 0,
                    state_key(book).imbalance_sign,
                    static_cast<int>(sp < spread_cap ? sp : spread_cap)};
}

inline int n_market_states(int spread_cap) { return 9 * spread_cap; }

inline int state_index(const AgentState& s, int spread_cap) {
  return ((s.inventory_sign + 1) * 3 + (s.imbalance_sign + 1)) * spread_cap +
         (s.spread_bucket - 1);
}

// Versioned binary checkpoint carrying the table and the exploration state;
// doubles round-trip exactly.
void save_qtable(const QTable& q, const ExplorationSchedule& sched,
                 const std::string& path);
std::pair<QTable, ExplorationSchedule> load_qtable(const std::string& path);

}  // namespace lobtt
