#pragma once

#include <map>
#include <string>

#include "fbnc/simulator.hpp"

namespace fbnc {

// `key = value` lines; '#' starts a comment. Unknown keys are rejected.
std::map<std::string, std::string> read_config_file(const std::string& path);

// Apply file values onto cfg. Flags parsed afterwards override these.
void apply_config_entries(SimConfig& cfg,
                          const std::map<std::string, std::string>& entries);

// CI hook: FBNC_LAMBDA, FBNC_MU, FBNC_RECEIVERS, FBNC_POLICY, FBNC_CODING,
// FBNC_Q, FBNC_SLOTS, FBNC_SEED, FBNC_WARMUP, FBNC_VERIFY override file
// values; explicit flags still win.
void apply_env_overrides(SimConfig& cfg);

std::string describe(const SimConfig& cfg);

}  // namespace fbnc
