#pragma once

#include <string>

#include "lobtt/book.hpp"

namespace lobtt {

// Day file layout (UTF-8, '\n' line endings):
//   line 1: day_id,tick_size,b1,vb1,b2,vb2,c1,vs1,c2,vs2        (day metadata + initial snapshot)
//   line 2: index,timestamp_us,side,level,signed_size,price_ticks,b1,vb1,b2,vb2,c1,vs1,c2,vs2
//   rest:   one event per row, snapshot columns carrying the post-event state
// Integers are plain decimal, side is B or S, tick_size uses the shortest
// decimal that parses back to the same double, so write/read round-trips
// bit-exactly.

EventLog read_event_log(const std::string& path);
void write_event_log(const EventLog& log, const std::string& path);

// Shortest decimal representation that strtod parses back to the same bits.
std::string format_double(double x);

}  // namespace lobtt
