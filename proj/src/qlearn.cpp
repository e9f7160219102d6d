#include "lobtt/qlearn.hpp"

#include <bit>
#include <cassert>
#include <cstring>
#include <fstream>

namespace lobtt {

QTable QTable::make(int n_states, int n_actions, double beta, double gamma) {
  assert(n_states > 0 && n_actions > 0);
  QTable q;
  q.n_states = n_states;
  q.n_actions = n_actions;
  q.beta = beta;
  q.gamma = gamma;
  q.values.assign(static_cast<std::size_t>(n_states) * n_actions, 0.0);
  return q;
}

void QTable::init_uniform(double range, Rng& rng) {
  for (double& v : values) v = rng.uniform(-range, range);
}

int argmax_action(const QTable& q, int s) {
  int best = 0;
  double best_v = q.at(s, 0);
  for (int a = 1; a < q.n_actions; ++a) {
    const double v = q.at(s, a);
    if (v > best_v) {
      best_v = v;
      best = a;
    }
  }
  return best;
}

double max_value(const QTable& q, int s) { return q.at(s, argmax_action(q, s)); }

void q_update(QTable& q, int s, int a, double r, int s_next) {
  double& v = q.at(s, a);
  v = (1.0 - q.beta) * v + q.beta * (r + q.gamma * max_value(q, s_next));
}

int select_action(const QTable& q, int s, double epsilon, Rng& rng) {
  if (rng.uniform01() < epsilon)
    return static_cast<int>(rng.bounded(static_cast<std::uint64_t>(q.n_actions)));
  return argmax_action(q, s);
}

namespace {

constexpr char kMagic[4] = {'L', 'T', 'Q', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ofstream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ofstream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_f64(std::ofstream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[i]} << (8 * i);
  return v;
}

std::uint64_t get_u64(std::ifstream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
  return v;
}

double get_f64(std::ifstream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void save_qtable(const QTable& q, const ExplorationSchedule& sched,
                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(q.n_states));
  put_u32(out, static_cast<std::uint32_t>(q.n_actions));
  put_f64(out, q.beta);
  put_f64(out, q.gamma);
  put_f64(out, sched.epsilon);
  put_f64(out, sched.decay);
  for (double v : q.values) put_f64(out, v);
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::pair<QTable, ExplorationSchedule> load_qtable(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error(path + ": not a Q-table checkpoint");
  if (get_u32(in) != kVersion)
    throw std::runtime_error(path + ": unsupported checkpoint version");
  const int n_states = static_cast<int>(get_u32(in));
  const int n_actions = static_cast<int>(get_u32(in));
  if (n_states <= 0 || n_actions <= 0 || n_states > (1 << 20) || n_actions > (1 << 10))
    throw std::runtime_error(path + ": implausible checkpoint dimensions");
  const double beta = get_f64(in);
  const double gamma = get_f64(in);
  ExplorationSchedule sched;
  sched.epsilon = get_f64(in);
  sched.decay = get_f64(in);
  QTable q = QTable::make(n_states, n_actions, beta, gamma);
  for (double& v : q.values) v = get_f64(in);
  if (!in) throw std::runtime_error(path + ": truncated checkpoint");
  return {std::move(q), sched};
}

}  // namespace lobtt
