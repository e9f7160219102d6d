#include "lobtt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "lobtt/log_csv.hpp"

namespace lobtt {

std::uint64_t phase_gen() { return fnv1a64("gen"); }
std::uint64_t phase_qinit() { return fnv1a64("qinit"); }
std::uint64_t phase_train() { return fnv1a64("train"); }
std::uint64_t phase_test() { return fnv1a64("test"); }

std::string dynamics_name(DynamicsMode m) {
  return m == DynamicsMode::Sequential ? "seq" : "jump";
}

namespace {

// Same window as occurrence_masks: events [from, from + t_next], day-end
// truncated. Scanned directly so Sequential episodes stay index-free.
bool window_covers(const EventLog& log, EventIndex from, EventIndex t_next,
                   SignatureMask required) {
  if (required.empty()) return true;
  std::uint16_t missing = required.bits;
  const EventIndex last =
      std::min<EventIndex>(from + t_next, static_cast<EventIndex>(log.events.size()) - 1);
  for (EventIndex j = from; j <= last && missing != 0; ++j)
    missing &= static_cast<std::uint16_t>(~signature_of(log.events[static_cast<std::size_t>(j)]).bits);
  return missing == 0;
}

}  // namespace

EpisodeResult run_episode(const EventLog& log, const JumpIndex* index, QTable& q,
                          ExplorationSchedule& sched, const EpisodeConfig& cfg, Rng& rng) {
  EpisodeResult res;
  const EventIndex day_len = static_cast<EventIndex>(log.events.size());
  EventIndex t = 0;
  MMOrders orders;
  Inventory inv;

  while ((cfg.update_budget == 0 || res.stats.updates < cfg.update_budget) && t < day_len) {
    const LobState& here = state_at(log, t);
    const int s_now =
        state_index(make_agent_state(inv.position, here, cfg.spread_cap), cfg.spread_cap);
    const Action action{select_action(q, s_now, sched.epsilon, rng)};

    std::int64_t penalty = 0;
    if (cfg.inventory_max > 0 && std::llabs(inv.position) >= cfg.inventory_max)
      penalty += enforce_liquidation(inv, spread_ticks(here));

    ReconcileResult rec = reconcile(action, orders, here, cfg.order_size);
    if (action.is_liquidate()) penalty += enforce_liquidation(inv, spread_ticks(here));
    const SignatureMask required = signature_of(rec.events);

    const Clock clock{t, res.stats.updates, cfg.latency};
    const auto step =
        step_dynamics(cfg.mode, clock, log, index, state_key(here), required, cfg.jump, rng);
    if (!step) break;

    if (step->jumped) ++res.stats.jumps;
    if (step->fell_back) ++res.stats.fallbacks;
    if (window_covers(log, step->landing, cfg.jump.t_next, required))
      ++res.stats.covered_activations;

    IntervalResult iv =
        process_interval(rec.orders, inv, log, step->continuation_start, step->next_activation);
    iv.rewards.liquidation_part -= penalty;
    inv = iv.inventory;
    orders = iv.orders;

    const std::int64_t r = total_reward(iv.rewards);
    const int s_next = state_index(
        make_agent_state(inv.position, state_at(log, step->next_activation), cfg.spread_cap),
        cfg.spread_cap);
    if (cfg.learn) {
      q_update(q, s_now, action.id, static_cast<double>(r), s_next);
      sched.step();
    }
    res.rewards.push_back(r);
    res.stats.total_reward += r;
    ++res.stats.updates;
    t = step->next_activation;
  }

  res.stats.final_position = inv.position;
  res.stats.final_epsilon = sched.epsilon;
  return res;
}

std::vector<double> cumulative_average(const std::vector<std::int64_t>& rewards) {
  std::vector<double> out(rewards.size());
  std::int64_t cum = 0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    cum += rewards[i];
    out[i] = static_cast<double>(cum) / static_cast<double>(i + 1);
  }
  return out;
}

CohortCurve cohort_curve(const std::vector<std::vector<double>>& per_run_gains) {
  CohortCurve c;
  c.n_samples = static_cast<std::int64_t>(per_run_gains.size());
  if (per_run_gains.empty()) return c;

  std::size_t grid = per_run_gains.front().size();
  for (const auto& g : per_run_gains) grid = std::min(grid, g.size());

  c.mean.resize(grid);
  c.stddev.resize(grid);
  c.snr.resize(grid);
  const double n = static_cast<double>(c.n_samples);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t u = 0; u < grid; ++u) {
    double sum = 0.0;
    for (const auto& g : per_run_gains) sum += g[u];
    const double mean = sum / n;
    c.mean[u] = mean;
    if (c.n_samples < 2) {
      c.stddev[u] = nan;
      c.snr[u] = nan;
      continue;
    }
    double ss = 0.0;
    for (const auto& g : per_run_gains) {
      const double d = g[u] - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    c.stddev[u] = sd;
    c.snr[u] = sd > 0.0 ? mean / sd : nan;
  }
  return c;
}

namespace {

DynamicsMode parse_dynamics(const std::string& s, const std::string& what) {
  if (s == "seq" || s == "sequential") return DynamicsMode::Sequential;
  if (s == "jump") return DynamicsMode::Jump;
  throw std::runtime_error(what + ": unknown dynamics '" + s + "' (want seq or jump)");
}

[[noreturn]] void bad_value(const std::string& key, const std::string& why) {
  throw std::runtime_error("config key '" + key + "': " + why);
}

}  // namespace

ExperimentConfig experiment_from_config(const KeyValueConfig& kv) {
  ExperimentConfig c;
  c.master_seed = kv.get_uint("seed", c.master_seed);
  c.n_agents = static_cast<int>(kv.get_int("n_agents", c.n_agents));
  c.t_train = kv.get_int("t_train", c.t_train);
  c.test_update_cap = kv.get_int("test_update_cap", c.test_update_cap);

  if (kv.has("pairs")) {
    for (const std::string& tok : kv.get_list("pairs")) {
      const auto dash = tok.find('-');
      if (dash == std::string::npos)
        bad_value("pairs", "'" + tok + "' is not of the form train-test, e.g. jump-seq");
      const auto p = std::make_pair(parse_dynamics(tok.substr(0, dash), "pairs"),
                                    parse_dynamics(tok.substr(dash + 1), "pairs"));
      if (std::find(c.pairs.begin(), c.pairs.end(), p) != c.pairs.end())
        bad_value("pairs", "duplicate entry '" + tok + "'");
      c.pairs.push_back(p);
    }
  } else {
    for (DynamicsMode a : {DynamicsMode::Sequential, DynamicsMode::Jump})
      for (DynamicsMode b : {DynamicsMode::Sequential, DynamicsMode::Jump})
        c.pairs.emplace_back(a, b);
  }

  const std::string lm = kv.get_string("latency_mode", "events");
  if (lm == "events" || lm == "event_ticks")
    c.latency.mode = LatencyMode::EventTicks;
  else if (lm == "wallclock" || lm == "wall_clock")
    c.latency.mode = LatencyMode::WallClock;
  else
    bad_value("latency_mode", "unknown mode '" + lm + "' (want events or wallclock)");
  c.latency.value = kv.get_int("latency_value", c.latency.value);

  c.jump.t_next = kv.get_int("jump_t_next", c.jump.t_next);
  c.jump.delta_sigma_max = kv.get_double("jump_delta_sigma_max", c.jump.delta_sigma_max);
  c.jump.exclusion_radius = kv.get_int("jump_exclusion_radius", c.jump.exclusion_radius);
  c.jump.allow_past_jumps = kv.get_bool("jump_allow_past", c.jump.allow_past_jumps);

  c.order_size = kv.get_int("order_size", c.order_size);
  c.inventory_max = kv.get_int("inventory_max", c.inventory_max);
  c.spread_cap = static_cast<int>(kv.get_int("spread_cap", c.spread_cap));
  c.q_beta = kv.get_double("q_beta", c.q_beta);
  c.q_gamma = kv.get_double("q_gamma", c.q_gamma);
  c.q_init_range = kv.get_double("q_init_range", c.q_init_range);
  c.eps_initial = kv.get_double("eps_initial", c.eps_initial);
  c.eps_decay = kv.get_double("eps_decay", c.eps_decay);
  c.test_learning = kv.get_bool("test_learning", c.test_learning);
  c.threads = static_cast<int>(kv.get_int("threads", c.threads));

  if (kv.has("day_files")) c.day_files = kv.get_list("day_files");
  c.n_synth_days = static_cast<int>(kv.get_int("n_days", c.n_synth_days));

  c.gen.n_events = kv.get_int("gen_n_events", c.gen.n_events);
  c.gen.tick_size = kv.get_double("gen_tick_size", c.gen.tick_size);
  c.gen.initial_mid = kv.get_int("gen_initial_mid", c.gen.initial_mid);
  c.gen.mean_volume = kv.get_double("gen_mean_volume", c.gen.mean_volume);
  c.gen.mean_interarrival_us =
      kv.get_double("gen_mean_interarrival_us", c.gen.mean_interarrival_us);
  c.gen.w_add_best = kv.get_double("gen_w_add_best", c.gen.w_add_best);
  c.gen.w_add_second = kv.get_double("gen_w_add_second", c.gen.w_add_second);
  c.gen.w_add_inside = kv.get_double("gen_w_add_inside", c.gen.w_add_inside);
  c.gen.w_cancel_best = kv.get_double("gen_w_cancel_best", c.gen.w_cancel_best);
  c.gen.w_cancel_second = kv.get_double("gen_w_cancel_second", c.gen.w_cancel_second);
  c.gen.w_market = kv.get_double("gen_w_market", c.gen.w_market);
  c.gen.imbalance_feedback = kv.get_double("gen_imbalance_feedback", c.gen.imbalance_feedback);

  const auto unread = kv.unread_keys();
  if (!unread.empty()) {
    std::string msg = "unknown config key(s):";
    for (const auto& k : unread) msg += " " + k;
    throw std::runtime_error(msg);
  }

  if (c.n_agents < 1) bad_value("n_agents", "must be >= 1");
  if (c.t_train < 1) bad_value("t_train", "must be >= 1");
  if (c.test_update_cap < 1) bad_value("test_update_cap", "must be >= 1");
  if (c.latency.value < 1) bad_value("latency_value", "must be >= 1");
  if (c.order_size < 1) bad_value("order_size", "must be >= 1");
  if (c.inventory_max < 0) bad_value("inventory_max", "must be >= 0 (0 disables flattening)");
  if (c.spread_cap < 1) bad_value("spread_cap", "must be >= 1");
  if (!(c.q_beta > 0.0 && c.q_beta <= 1.0)) bad_value("q_beta", "must be in (0, 1]");
  if (!(c.q_gamma >= 0.0 && c.q_gamma < 1.0)) bad_value("q_gamma", "must be in [0, 1)");
  if (!(c.q_init_range >= 0.0)) bad_value("q_init_range", "must be >= 0");
  if (!(c.eps_initial >= 0.0 && c.eps_initial <= 1.0)) bad_value("eps_initial", "must be in [0, 1]");
  if (!(c.eps_decay > 0.0 && c.eps_decay <= 1.0)) bad_value("eps_decay", "must be in (0, 1]");
  if (c.threads < 0) bad_value("threads", "must be >= 0 (0 = hardware concurrency)");
  if (c.n_synth_days < 0) bad_value("n_days", "must be >= 0");
  if (c.jump.t_next < 0) bad_value("jump_t_next", "must be >= 0");
  if (c.jump.exclusion_radius < 0) bad_value("jump_exclusion_radius", "must be >= 0");
  if (!(c.jump.delta_sigma_max >= 0.0) || !std::isfinite(c.jump.delta_sigma_max))
    bad_value("jump_delta_sigma_max", "must be finite and >= 0");

  c.config_hash = kv.hash();
  return c;
}

std::vector<EventLog> prepare_days(const ExperimentConfig& cfg) {
  std::vector<EventLog> days;
  if (!cfg.day_files.empty()) {
    for (const auto& path : cfg.day_files) days.push_back(read_event_log(path));
  } else {
    for (int i = 0; i < cfg.n_synth_days; ++i) {
      GenConfig g = cfg.gen;
      char buf[32];
      std::snprintf(buf, sizeof buf, "synth-%03d", i);
      g.day_id = buf;
      g.seed = derive_seed(cfg.master_seed, {phase_gen(), static_cast<std::uint64_t>(i)});
      days.push_back(generate_day(g));
    }
  }
  if (days.empty())
    throw InsufficientDays("no days to run on: provide day_files or set n_days >= 1");

  std::set<std::string> ids;
  for (const auto& d : days) {
    if (!ids.insert(d.day_id).second)
      throw std::runtime_error("duplicate day_id '" + d.day_id + "'");
    const auto issues = validate_log(d);
    if (!issues.empty()) {
      std::ostringstream os;
      os << "day '" << d.day_id << "': " << issues.size()
         << " validation issue(s); first at event " << issues.front().event_index << ": "
         << issues.front().message;
      throw std::runtime_error(os.str());
    }
  }
  return days;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t workers = threads <= 0
                            ? std::max(1u, std::thread::hardware_concurrency())
                            : static_cast<std::size_t>(threads);
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      {
        std::lock_guard<std::mutex> lock(err_mu);
        if (first_error) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

// Cohort moments per update index in exact integer arithmetic: the cumulative
// reward is an int64, its square an __int128, so fold order cannot change a
// bit of the output.
struct CellAgg {
  std::vector<std::int64_t> count;
  std::vector<std::int64_t> sum;
  std::vector<__int128> sum_sq;
  std::mutex mu;

  void fold(const std::vector<std::int64_t>& rewards) {
    std::lock_guard<std::mutex> lock(mu);
    if (rewards.size() > count.size()) {
      count.resize(rewards.size(), 0);
      sum.resize(rewards.size(), 0);
      sum_sq.resize(rewards.size(), 0);
    }
    std::int64_t cum = 0;
    for (std::size_t u = 0; u < rewards.size(); ++u) {
      cum += rewards[u];
      count[u] += 1;
      sum[u] += cum;
      sum_sq[u] += static_cast<__int128>(cum) * cum;
    }
  }
};

EpisodeConfig episode_config(const ExperimentConfig& cfg, DynamicsMode mode,
                             std::int64_t budget, bool learn) {
  EpisodeConfig ep;
  ep.mode = mode;
  ep.latency = cfg.latency;
  ep.jump = cfg.jump;
  ep.order_size = cfg.order_size;
  ep.inventory_max = cfg.inventory_max;
  ep.spread_cap = cfg.spread_cap;
  ep.update_budget = budget;
  ep.learn = learn;
  return ep;
}

std::uint64_t dyn_tag(DynamicsMode m) { return m == DynamicsMode::Jump ? 1 : 0; }

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

void write_curve_rows(std::ostream& out, const std::string& train_name,
                      const std::string& test_name, const std::string& scope,
                      const CellAgg& agg) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t u = 0; u < agg.count.size(); ++u) {
    const std::int64_t n = agg.count[u];
    if (n < 1) break;  // counts are non-increasing: every run contributes a prefix
    const std::int64_t t = static_cast<std::int64_t>(u) + 1;
    const double mean =
        static_cast<double>(agg.sum[u]) / (static_cast<double>(n) * static_cast<double>(t));
    double sd = nan;
    if (n >= 2) {
      const __int128 num = static_cast<__int128>(n) * agg.sum_sq[u] -
                           static_cast<__int128>(agg.sum[u]) * agg.sum[u];
      const double denom = static_cast<double>(n) * static_cast<double>(n - 1) *
                           static_cast<double>(t) * static_cast<double>(t);
      sd = std::sqrt(static_cast<double>(num) / denom);
    }
    const double snr = (sd == sd && sd > 0.0) ? mean / sd : nan;
    out << train_name << ',' << test_name << ',' << scope << ',' << t << ','
        << format_double(mean) << ',' << format_double(sd) << ',' << n << ','
        << format_double(snr) << '\n';
  }
}

}  // namespace

MatrixSummary run_matrix(const ExperimentConfig& cfg, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);

  const std::vector<EventLog> days = prepare_days(cfg);
  const int n_days = static_cast<int>(days.size());
  const int n_agents = cfg.n_agents;

  MatrixSummary summary;
  for (const auto& d : days) summary.day_ids.push_back(d.day_id);

  bool needs_index = false;
  std::set<DynamicsMode> train_modes;
  for (const auto& p : cfg.pairs) {
    train_modes.insert(p.first);
    if (p.first == DynamicsMode::Jump || p.second == DynamicsMode::Jump) needs_index = true;
  }

  std::vector<std::optional<JumpIndex>> indices(static_cast<std::size_t>(n_days));
  if (needs_index) {
    parallel_for(static_cast<std::size_t>(n_days), cfg.threads, [&](std::size_t d) {
      indices[d] = build_index(days[d], cfg.jump);
    });
    summary.indices_built = n_days;
  }
  const auto index_for = [&](DynamicsMode m, int day) -> const JumpIndex* {
    return m == DynamicsMode::Jump ? &*indices[static_cast<std::size_t>(day)] : nullptr;
  };

  // one trained (table, exploration state) per (train dynamics, day, agent)
  struct TrainTask {
    DynamicsMode dyn;
    int day;
    int agent;
  };
  std::vector<TrainTask> train_tasks;
  for (DynamicsMode dyn : train_modes)
    for (int d = 0; d < n_days; ++d)
      for (int a = 0; a < n_agents; ++a) train_tasks.push_back({dyn, d, a});

  const auto train_slot = [&](DynamicsMode dyn, int day, int agent) {
    return (dyn_tag(dyn) * static_cast<std::size_t>(n_days) + static_cast<std::size_t>(day)) *
               static_cast<std::size_t>(n_agents) +
           static_cast<std::size_t>(agent);
  };
  std::vector<std::optional<std::pair<QTable, ExplorationSchedule>>> trained(
      2 * static_cast<std::size_t>(n_days) * static_cast<std::size_t>(n_agents));

  parallel_for(train_tasks.size(), cfg.threads, [&](std::size_t i) {
    const TrainTask& task = train_tasks[i];
    const std::uint64_t day_part = fnv1a64(days[static_cast<std::size_t>(task.day)].day_id);
    const std::uint64_t agent_part = static_cast<std::uint64_t>(task.agent);

    Rng qrng(derive_seed(cfg.master_seed,
                         {phase_qinit(), day_part, agent_part, dyn_tag(task.dyn)}));
    QTable q = QTable::make(n_market_states(cfg.spread_cap), Action::kCount, cfg.q_beta,
                            cfg.q_gamma);
    q.init_uniform(cfg.q_init_range, qrng);
    ExplorationSchedule sched{cfg.eps_initial, cfg.eps_decay};

    Rng erng(derive_seed(cfg.master_seed,
                         {phase_train(), day_part, agent_part, dyn_tag(task.dyn)}));
    run_episode(days[static_cast<std::size_t>(task.day)], index_for(task.dyn, task.day), q,
                sched, episode_config(cfg, task.dyn, cfg.t_train, true), erng);
    trained[train_slot(task.dyn, task.day, task.agent)] = {std::move(q), sched};
  });
  summary.runs_train = static_cast<std::int64_t>(train_tasks.size());

  struct TestTask {
    int pair;
    int train_day;
    int agent;
    int test_day;
  };
  std::vector<TestTask> test_tasks;
  for (int p = 0; p < static_cast<int>(cfg.pairs.size()); ++p)
    for (int td = 0; td < n_days; ++td)
      for (int a = 0; a < n_agents; ++a)
        for (int vd = 0; vd < n_days; ++vd) test_tasks.push_back({p, td, a, vd});

  // cell = (pair, scope); scope 0 tests on the training day, 1 on the others
  std::vector<std::unique_ptr<CellAgg>> cells(cfg.pairs.size() * 2);
  for (auto& c : cells) c = std::make_unique<CellAgg>();

  parallel_for(test_tasks.size(), cfg.threads, [&](std::size_t i) {
    const TestTask& task = test_tasks[i];
    const auto [train_dyn, test_dyn] = cfg.pairs[static_cast<std::size_t>(task.pair)];
    const auto& ck = trained[train_slot(train_dyn, task.train_day, task.agent)];

    QTable q = ck->first;  // each test run continues from its own copy
    ExplorationSchedule sched = ck->second;
    Rng erng(derive_seed(
        cfg.master_seed,
        {phase_test(), fnv1a64(days[static_cast<std::size_t>(task.train_day)].day_id),
         fnv1a64(days[static_cast<std::size_t>(task.test_day)].day_id),
         static_cast<std::uint64_t>(task.agent), dyn_tag(train_dyn) * 2 + dyn_tag(test_dyn)}));

    const EpisodeResult res = run_episode(
        days[static_cast<std::size_t>(task.test_day)], index_for(test_dyn, task.test_day), q,
        sched, episode_config(cfg, test_dyn, cfg.test_update_cap, cfg.test_learning), erng);

    const std::size_t cell =
        static_cast<std::size_t>(task.pair) * 2 + (task.test_day != task.train_day ? 1 : 0);
    cells[cell]->fold(res.rewards);
  });
  summary.runs_test = static_cast<std::int64_t>(test_tasks.size());

  {
    std::ofstream out(out_dir + "/curves.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_dir + "/curves.csv");
    out << "train_dynamics,test_dynamics,scope,update,mean_gain,std_gain,n_samples,snr\n";
    for (std::size_t p = 0; p < cfg.pairs.size(); ++p) {
      const std::string tn = dynamics_name(cfg.pairs[p].first);
      const std::string vn = dynamics_name(cfg.pairs[p].second);
      write_curve_rows(out, tn, vn, "same_day", *cells[p * 2]);
      if (n_days > 1) write_curve_rows(out, tn, vn, "cross", *cells[p * 2 + 1]);
    }
  }

  {
    std::map<std::string, std::string> m;
    m["config_hash"] = hex64(cfg.config_hash);
    m["master_seed"] = std::to_string(cfg.master_seed);
    m["n_agents"] = std::to_string(n_agents);
    m["t_train"] = std::to_string(cfg.t_train);
    m["indices_built"] = std::to_string(summary.indices_built);
    m["runs_train"] = std::to_string(summary.runs_train);
    m["runs_test"] = std::to_string(summary.runs_test);
    m["seed_scheme"] =
        "splitmix64 fold of (phase, day, agent, dynamics) into the master seed; "
        "phases gen, qinit, train, test";
    std::string ids, counts, hashes, pairs;
    for (int d = 0; d < n_days; ++d) {
      if (d) {
        ids += ',';
        counts += ',';
        hashes += ',';
      }
      ids += days[static_cast<std::size_t>(d)].day_id;
      counts += std::to_string(days[static_cast<std::size_t>(d)].events.size());
      hashes += hex64(log_content_hash(days[static_cast<std::size_t>(d)]));
    }
    for (std::size_t p = 0; p < cfg.pairs.size(); ++p) {
      if (p) pairs += ',';
      pairs += dynamics_name(cfg.pairs[p].first) + "-" + dynamics_name(cfg.pairs[p].second);
    }
    m["day_ids"] = ids;
    m["day_events"] = counts;
    m["day_hashes"] = hashes;
    m["pairs"] = pairs;

    std::ofstream out(out_dir + "/manifest.txt", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_dir + "/manifest.txt");
    for (const auto& [k, v] : m) out << k << " = " << v << '\n';
  }

  return summary;
}

void write_episode_csv(const EpisodeResult& res, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "update,reward,cumulative_average_gain\n";
  std::int64_t cum = 0;
  for (std::size_t u = 0; u < res.rewards.size(); ++u) {
    cum += res.rewards[u];
    const double gain = static_cast<double>(cum) / static_cast<double>(u + 1);
    out << (u + 1) << ',' << res.rewards[u] << ',' << format_double(gain) << '\n';
  }
}

}  // namespace lobtt
