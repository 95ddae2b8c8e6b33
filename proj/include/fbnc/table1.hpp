#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "fbnc/simulator.hpp"

namespace fbnc {

// The six-slot two-receiver drop-when-seen example: scripted arrivals in
// slots 1,2,3,5 and the fixed channel pattern, run over GF(2) with
// next-unseen coding.
struct Table1Script {
  SimConfig config;
  std::vector<std::uint8_t> arrivals;
  std::vector<std::vector<std::uint8_t>> receptions;
};
Table1Script table1_script();

// Formatted replay: per slot, the queue after the arrival point, the
// transmitted combination, the channel state, and each receiver's decoded
// and seen-but-not-decoded sets.
std::string table1_render();

// Render, print, and byte-compare against the golden transcript.
// Returns 0 on a match, 3 on any mismatch (with a line diff on `out`).
int replay_table1(std::ostream& out, const std::string& golden_path);

}  // namespace fbnc
