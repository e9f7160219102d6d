#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lobtt/harness.hpp"
#include "lobtt/log_csv.hpp"

namespace {

using namespace lobtt;

KeyValueConfig load_config(const std::string& path, const std::vector<std::string>& sets) {
  KeyValueConfig kv =
      path.empty() ? KeyValueConfig::from_string("", "<empty>") : KeyValueConfig::from_file(path);
  for (const auto& s : sets) kv.apply_override(s);
  return kv;
}

EventLog load_day(const std::string& path) {
  EventLog log = read_event_log(path);
  const auto issues = validate_log(log);
  if (!issues.empty()) {
    std::ostringstream os;
    os << path << ": " << issues.size() << " validation issue(s); first at event "
       << issues.front().event_index << ": " << issues.front().message;
    throw std::runtime_error(os.str());
  }
  return log;
}

DynamicsMode parse_dynamics_arg(const std::string& s) {
  if (s == "seq" || s == "sequential") return DynamicsMode::Sequential;
  if (s == "jump") return DynamicsMode::Jump;
  throw CLI::ValidationError("--dynamics", "want seq or jump, got '" + s + "'");
}

int cmd_generate(const KeyValueConfig& kv, const std::string& out_dir) {
  const ExperimentConfig cfg = experiment_from_config(kv);
  std::filesystem::create_directories(out_dir);
  const auto days = prepare_days(cfg);
  for (const auto& day : days) {
    const std::string path = out_dir + "/" + day.day_id + ".csv";
    write_event_log(day, path);
    std::cout << path << ": " << day.events.size() << " events\n";
  }
  return 0;
}

int cmd_index(const KeyValueConfig& kv, const std::string& day_path,
              const std::string& cache_path) {
  const ExperimentConfig cfg = experiment_from_config(kv);
  const EventLog log = load_day(day_path);
  if (!cache_path.empty()) {
    if (auto cached = read_index_cache(cache_path, log, cfg.jump)) {
      std::cout << cache_path << ": up to date (" << cached->day_length << " indices)\n";
      return 0;
    }
  }
  const JumpIndex index = build_index(log, cfg.jump);
  if (!cache_path.empty()) {
    write_index_cache(index, log, cache_path);
    std::cout << cache_path << ": written\n";
  }
  std::cout << log.day_id << ": " << index.day_length << " indices, " << index.buckets.size()
            << " (imbalance, spread) buckets\n";
  return 0;
}

// Jump episodes need the day's index; reuse the cache when given and fresh,
// rebuild (and refresh the cache) otherwise.
const JumpIndex* maybe_index(std::optional<JumpIndex>& slot, DynamicsMode mode,
                             const EventLog& log, const ExperimentConfig& cfg,
                             const std::string& cache_path) {
  if (mode != DynamicsMode::Jump) return nullptr;
  if (!cache_path.empty()) {
    if (auto cached = read_index_cache(cache_path, log, cfg.jump)) {
      slot = std::move(*cached);
      return &*slot;
    }
  }
  slot = build_index(log, cfg.jump);
  if (!cache_path.empty()) write_index_cache(*slot, log, cache_path);
  return &*slot;
}

void print_episode(const EpisodeResult& res, const EventLog& log) {
  std::cout << log.day_id << ": " << res.stats.updates << " updates, " << res.stats.jumps
            << " jumps, " << res.stats.fallbacks << " fallbacks, "
            << res.stats.covered_activations << " covered, final position "
            << res.stats.final_position << ", total reward " << res.stats.total_reward
            << " half-tick*shares\n";
}

int cmd_train(const KeyValueConfig& kv, const std::string& day_path, const std::string& dyn,
              const std::string& out_path, const std::string& curve_path,
              const std::string& cache_path, std::uint64_t agent) {
  const ExperimentConfig cfg = experiment_from_config(kv);
  const EventLog log = load_day(day_path);
  const DynamicsMode mode = parse_dynamics_arg(dyn);

  std::optional<JumpIndex> slot;
  const JumpIndex* index = maybe_index(slot, mode, log, cfg, cache_path);

  const std::uint64_t day_part = fnv1a64(log.day_id);
  Rng qrng(derive_seed(cfg.master_seed, {phase_qinit(), day_part, agent, 0}));
  QTable q =
      QTable::make(n_market_states(cfg.spread_cap), Action::kCount, cfg.q_beta, cfg.q_gamma);
  q.init_uniform(cfg.q_init_range, qrng);
  ExplorationSchedule sched{cfg.eps_initial, cfg.eps_decay};

  Rng erng(derive_seed(cfg.master_seed, {phase_train(), day_part, agent, 0}));
  EpisodeConfig ep;
  ep.mode = mode;
  ep.latency = cfg.latency;
  ep.jump = cfg.jump;
  ep.order_size = cfg.order_size;
  ep.inventory_max = cfg.inventory_max;
  ep.spread_cap = cfg.spread_cap;
  ep.update_budget = cfg.t_train;
  ep.learn = true;
  const EpisodeResult res = run_episode(log, index, q, sched, ep, erng);

  save_qtable(q, sched, out_path);
  if (!curve_path.empty()) write_episode_csv(res, curve_path);
  print_episode(res, log);
  std::cout << out_path << ": checkpoint written, epsilon " << format_double(sched.epsilon)
            << "\n";
  return 0;
}

int cmd_test(const KeyValueConfig& kv, const std::string& day_path, const std::string& dyn,
             const std::string& checkpoint_path, const std::string& curve_path,
             const std::string& cache_path, std::uint64_t agent) {
  const ExperimentConfig cfg = experiment_from_config(kv);
  const EventLog log = load_day(day_path);
  const DynamicsMode mode = parse_dynamics_arg(dyn);

  std::optional<JumpIndex> slot;
  const JumpIndex* index = maybe_index(slot, mode, log, cfg, cache_path);

  auto [q, sched] = load_qtable(checkpoint_path);
  Rng erng(derive_seed(cfg.master_seed,
                       {phase_test(), fnv1a64(log.day_id), fnv1a64(log.day_id), agent,
                        mode == DynamicsMode::Jump ? 1ULL : 0ULL}));
  EpisodeConfig ep;
  ep.mode = mode;
  ep.latency = cfg.latency;
  ep.jump = cfg.jump;
  ep.order_size = cfg.order_size;
  ep.inventory_max = cfg.inventory_max;
  ep.spread_cap = cfg.spread_cap;
  ep.update_budget = cfg.test_update_cap;
  ep.learn = cfg.test_learning;
  const EpisodeResult res = run_episode(log, index, q, sched, ep, erng);

  if (!curve_path.empty()) write_episode_csv(res, curve_path);
  print_episode(res, log);
  return 0;
}

int cmd_matrix(const KeyValueConfig& kv, const std::string& out_dir) {
  const ExperimentConfig cfg = experiment_from_config(kv);
  const MatrixSummary s = run_matrix(cfg, out_dir);
  std::cout << out_dir << "/curves.csv and manifest.txt written: " << s.day_ids.size()
            << " days, " << s.runs_train << " training runs, " << s.runs_test
            << " test runs, " << s.indices_built << " indices built\n";
  return 0;
}

int cmd_report_day(const std::string& day_path) {
  const EventLog log = load_day(day_path);
  const DaySummary s = summarize(log);
  std::cout << log.day_id << ": " << s.n_events << " events\n";
  std::cout << "signature counts (sign, level, side; level 0 = posted inside the spread):\n";
  for (int b = 0; b < SignatureMask::kBits; ++b) {
    const Side side = b < 6 ? Side::Buy : Side::Sell;
    const int level = (b % 6) / 2;
    const char sign = (b % 2) ? '-' : '+';
    std::cout << "  " << sign << level << side_char(side) << ": " << s.signature_counts[b]
              << "\n";
  }
  std::cout << "spread histogram (ticks: events):\n";
  for (const auto& [sp, n] : s.spread_histogram) std::cout << "  " << sp << ": " << n << "\n";
  return 0;
}

int cmd_report_matrix(const std::string& dir) {
  for (const char* name : {"/manifest.txt", "/curves.csv"}) {
    std::ifstream in(dir + name, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + dir + name);
    if (std::string(name) == "/manifest.txt") {
      std::cout << in.rdbuf();
      continue;
    }
    std::string line;
    std::getline(in, line);  // header
    std::size_t rows = 0;
    std::string last;
    while (std::getline(in, line)) {
      ++rows;
      last = line;
    }
    std::cout << "curves.csv: " << rows << " rows";
    if (!last.empty()) std::cout << ", last: " << last;
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"event-driven order book backtester for quoting agents"};
  app.require_subcommand(1);
  // let --config / --set appear after the subcommand name
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> sets;
  app.add_option("-c,--config", config_path, "key = value configuration file");
  app.add_option("-s,--set", sets, "override, e.g. --set n_agents=8 (repeatable)");

  std::string out_dir = "out";
  std::string day_path, cache_path, dyn = "seq", checkpoint_path, curve_path, matrix_dir;
  std::uint64_t agent = 0;

  CLI::App* generate = app.add_subcommand("generate", "write synthetic day files");
  generate->add_option("-o,--out", out_dir, "output directory")->capture_default_str();

  CLI::App* index = app.add_subcommand("index", "build a day's jump index");
  index->add_option("-d,--day", day_path, "day CSV file")->required();
  index->add_option("--cache", cache_path, "binary cache path (reused when fresh)");

  CLI::App* train = app.add_subcommand("train", "train one agent on one day");
  train->add_option("-d,--day", day_path, "day CSV file")->required();
  train->add_option("--dynamics", dyn, "seq or jump")->capture_default_str();
  train->add_option("-o,--out", checkpoint_path, "checkpoint output path")->required();
  train->add_option("--curve", curve_path, "per-update reward CSV");
  train->add_option("--cache", cache_path, "jump index cache path");
  train->add_option("--agent", agent, "agent number used in seed derivation")
      ->capture_default_str();

  CLI::App* test = app.add_subcommand("test", "evaluate a checkpoint on one day");
  test->add_option("-d,--day", day_path, "day CSV file")->required();
  test->add_option("--dynamics", dyn, "seq or jump")->capture_default_str();
  test->add_option("--checkpoint", checkpoint_path, "trained checkpoint")->required();
  test->add_option("--curve", curve_path, "per-update reward CSV");
  test->add_option("--cache", cache_path, "jump index cache path");
  test->add_option("--agent", agent, "agent number used in seed derivation")
      ->capture_default_str();

  CLI::App* matrix = app.add_subcommand("matrix", "run the full train/test matrix");
  matrix->add_option("-o,--out", out_dir, "output directory")->capture_default_str();

  CLI::App* report = app.add_subcommand("report", "summarize a day file or matrix directory");
  report->add_option("-d,--day", day_path, "day CSV file");
  report->add_option("-m,--matrix", matrix_dir, "matrix output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    const KeyValueConfig kv = load_config(config_path, sets);
    if (generate->parsed()) return cmd_generate(kv, out_dir);
    if (index->parsed()) return cmd_index(kv, day_path, cache_path);
    if (train->parsed())
      return cmd_train(kv, day_path, dyn, checkpoint_path, curve_path, cache_path, agent);
    if (test->parsed())
      return cmd_test(kv, day_path, dyn, checkpoint_path, curve_path, cache_path, agent);
    if (matrix->parsed()) return cmd_matrix(kv, out_dir);
    if (report->parsed()) {
      if (!day_path.empty()) return cmd_report_day(day_path);
      if (!matrix_dir.empty()) return cmd_report_matrix(matrix_dir);
      std::cerr << "report: pass --day or --matrix\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
