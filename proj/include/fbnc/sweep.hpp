#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fbnc/metrics.hpp"
#include "fbnc/simulator.hpp"

namespace fbnc {

// Load sweep: hold lambda or mu fixed in the base config and step the other
// through `values`, one independent simulation per point.
struct SweepSpec {
  SimConfig base;
  enum class Param { lambda, mu } param = Param::lambda;
  std::vector<double> values;
  // One horizon per point, or a single horizon for all; empty = base.slots.
  std::vector<std::uint64_t> slots_per_point;
  int jobs = 1;
};

struct SweepPoint {
  double value = 0.0;
  double rho = 0.0;
  bool stable = false;
  SummaryStats stats;
  RunReport report;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::optional<double> slope_phys_q;          // log-log vs 1/(1-rho)
  std::optional<double> slope_decoding_delay;
  std::optional<double> slope_delivery_delay;
  std::string csv;
};

// Header row then one CSV row per point (in the given order, unstable points
// marked and skipped); footer comments carry the fitted log-log slopes.
// Byte-identical output for identical spec and seed.
SweepResult run_sweep(const SweepSpec& spec);

extern const char* const kSweepCsvHeader;

}  // namespace fbnc
