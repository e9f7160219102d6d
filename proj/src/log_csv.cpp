#include "lobtt/log_csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace lobtt {

namespace {

[[noreturn]] void fail(const std::string& path, std::size_t line, const std::string& msg) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::int64_t parse_i64(const std::string& s, const std::string& path, std::size_t line) {
  if (s.empty()) fail(path, line, "empty integer field");
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size())
    fail(path, line, "bad integer '" + s + "'");
  return static_cast<std::int64_t>(v);
}

double parse_f64(const std::string& s, const std::string& path, std::size_t line) {
  if (s.empty()) fail(path, line, "empty number field");
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end != s.c_str() + s.size())
    fail(path, line, "bad number '" + s + "'");
  return v;
}

Side parse_side(const std::string& s, const std::string& path, std::size_t line) {
  if (s == "B") return Side::Buy;
  if (s == "S") return Side::Sell;
  fail(path, line, "bad side '" + s + "'");
}

constexpr const char* kEventHeader =
    "index,timestamp_us,side,level,signed_size,price_ticks,b1,vb1,b2,vb2,c1,vs1,c2,vs2";

void read_snapshot(const std::vector<std::string>& f, std::size_t off, LobState& s,
                   const std::string& path, std::size_t line) {
  s.b1 = parse_i64(f[off + 0], path, line);
  s.vb1 = parse_i64(f[off + 1], path, line);
  s.b2 = parse_i64(f[off + 2], path, line);
  s.vb2 = parse_i64(f[off + 3], path, line);
  s.c1 = parse_i64(f[off + 4], path, line);
  s.vs1 = parse_i64(f[off + 5], path, line);
  s.c2 = parse_i64(f[off + 6], path, line);
  s.vs2 = parse_i64(f[off + 7], path, line);
}

void append_snapshot(std::string& out, const LobState& s) {
  out += std::to_string(s.b1);
  out += ',';
  out += std::to_string(s.vb1);
  out += ',';
  out += std::to_string(s.b2);
  out += ',';
  out += std::to_string(s.vb2);
  out += ',';
  out += std::to_string(s.c1);
  out += ',';
  out += std::to_string(s.vs1);
  out += ',';
  out += std::to_string(s.c2);
  out += ',';
  out += std::to_string(s.vs2);
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) return buf;
  }
  return buf;
}

EventLog read_event_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);

  EventLog log;
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) fail(path, 1, "missing metadata row");
  ++lineno;
  {
    auto f = split_csv(line);
    if (f.size() != 10) fail(path, lineno, "metadata row needs 10 fields");
    log.day_id = f[0];
    if (log.day_id.empty()) fail(path, lineno, "empty day_id");
    log.tick_size = parse_f64(f[1], path, lineno);
    read_snapshot(f, 2, log.initial_state, path, lineno);
  }

  if (!std::getline(in, line)) fail(path, 2, "missing header row");
  ++lineno;
  if (line != kEventHeader) fail(path, lineno, "unexpected header row");

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 14) fail(path, lineno, "event row needs 14 fields");
    LobEvent ev;
    ev.index = parse_i64(f[0], path, lineno);
    ev.timestamp_us = parse_i64(f[1], path, lineno);
    if (f[2].size() != 1) fail(path, lineno, "bad side '" + f[2] + "'");
    ev.side = parse_side(f[2], path, lineno);
    ev.level = static_cast<int>(parse_i64(f[3], path, lineno));
    ev.signed_size = parse_i64(f[4], path, lineno);
    ev.price = parse_i64(f[5], path, lineno);
    read_snapshot(f, 6, ev.post_state, path, lineno);
    log.events.push_back(ev);
  }
  return log;
}

void write_event_log(const EventLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");

  std::string buf;
  buf.reserve(1 << 16);
  buf += log.day_id;
  buf += ',';
  buf += format_double(log.tick_size);
  buf += ',';
  append_snapshot(buf, log.initial_state);
  buf += '\n';
  buf += kEventHeader;
  buf += '\n';
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));

  for (const LobEvent& ev : log.events) {
    buf.clear();
    buf += std::to_string(ev.index);
    buf += ',';
    buf += std::to_string(ev.timestamp_us);
    buf += ',';
    buf += side_char(ev.side);
    buf += ',';
    buf += std::to_string(ev.level);
    buf += ',';
    buf += std::to_string(ev.signed_size);
    buf += ',';
    buf += std::to_string(ev.price);
    buf += ',';
    append_snapshot(buf, ev.post_state);
    buf += '\n';
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace lobtt
