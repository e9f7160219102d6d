#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lobtt/config.hpp"
#include "lobtt/execution.hpp"
#include "lobtt/jump_index.hpp"
#include "lobtt/qlearn.hpp"
#include "lobtt/synth.hpp"

namespace lobtt {

class InsufficientDays : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpisodeConfig {
  DynamicsMode mode = DynamicsMode::Sequential;
  LatencyConfig latency;
  JumpConfig jump;
  Volume order_size = 100;
  Volume inventory_max = 1000;  // forced flatten at |position| >= this, at activations
  int spread_cap = 5;
  std::int64_t update_budget = 0;  // 0 = run to day end
  bool learn = true;               // Q updates and epsilon decay
};

struct EpisodeStats {
  std::int64_t updates = 0;
  std::int64_t jumps = 0;
  std::int64_t fallbacks = 0;
  // activations whose continuation (the jump landing under Jump dynamics, the
  // current index otherwise) holds every required signature within t_next
  std::int64_t covered_activations = 0;
  Volume final_position = 0;
  std::int64_t total_reward = 0;
  double final_epsilon = 0.0;
};

struct EpisodeResult {
  std::vector<std::int64_t> rewards;  // one entry per update, half-tick * shares
  EpisodeStats stats;
};

// One episode on one day: observe, act, reconcile quotes, resolve the cursor
// through step_dynamics, accrue rewards over the interval, update Q. `index`
// may be null under Sequential dynamics.
EpisodeResult run_episode(const EventLog& log, const JumpIndex* index, QTable& q,
                          ExplorationSchedule& sched, const EpisodeConfig& cfg, Rng& rng);

// G_t = (sum of the first t rewards) / t.
std::vector<double> cumulative_average(const std::vector<std::int64_t>& rewards);

// Pointwise cohort statistics on the common (min-length) update grid; sample
// standard deviation, SNR = mean / std (nan where the variance is zero).
struct CohortCurve {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<double> snr;
  std::int64_t n_samples = 0;
};

CohortCurve cohort_curve(const std::vector<std::vector<double>>& per_run_gains);

struct ExperimentConfig {
  std::uint64_t master_seed = 1;
  int n_agents = 48;
  std::int64_t t_train = 15000;
  // jump dynamics reach day end only by chance, so test episodes carry a cap
  std::int64_t test_update_cap = 200000;
  std::vector<std::pair<DynamicsMode, DynamicsMode>> pairs;  // (train, test)
  LatencyConfig latency;
  JumpConfig jump;
  Volume order_size = 100;
  Volume inventory_max = 1000;
  int spread_cap = 5;
  double q_beta = 0.001;
  double q_gamma = 0.97;
  double q_init_range = 0.01;
  double eps_initial = 0.2;
  double eps_decay = 0.9999;
  bool test_learning = true;
  int threads = 0;  // 0 = hardware concurrency
  std::vector<std::string> day_files;  // when empty, synthesize n_synth_days
  int n_synth_days = 4;
  GenConfig gen;
  std::uint64_t config_hash = 0;
};

// Reads every supported key, applies defaults, validates ranges, and rejects
// unknown keys (usually typos). See README for the key list.
ExperimentConfig experiment_from_config(const KeyValueConfig& kv);

// Day set for a run: load and validate day_files, or synthesize
// n_synth_days with per-day seeds derived from the master seed.
std::vector<EventLog> prepare_days(const ExperimentConfig& cfg);

std::string dynamics_name(DynamicsMode m);

struct MatrixSummary {
  std::vector<std::string> day_ids;
  std::int64_t runs_train = 0;
  std::int64_t runs_test = 0;
  int indices_built = 0;
};

// The full train/test grid: every requested (train, test) dynamics pair,
// trained per (day, agent), evaluated on the training day (same_day scope) and
// on every other day (cross scope). Writes curves.csv (one row per update per
// cell: mean gain, standard deviation, sample count, SNR) and manifest.txt
// into out_dir. Outputs are byte-identical across runs with equal configs
// regardless of thread count: cohort moments are accumulated in exact integer
// arithmetic, so task completion order cannot perturb them.
MatrixSummary run_matrix(const ExperimentConfig& cfg, const std::string& out_dir);

// update,reward,cumulative_average_gain rows for a single episode.
void write_episode_csv(const EpisodeResult& res, const std::string& path);

// Shared thread-pool loop; threads <= 0 means hardware concurrency, an
// effective width of 1 runs inline. Rethrows the first task exception after
// joining.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

// Seed derivation labels (folded with derive_seed, see rng.hpp).
std::uint64_t phase_gen();
std::uint64_t phase_qinit();
std::uint64_t phase_train();
std::uint64_t phase_test();

}  // namespace lobtt
