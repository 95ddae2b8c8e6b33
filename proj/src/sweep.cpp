#include "fbnc/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include "fbnc/rng.hpp"

namespace fbnc {

const char* const kSweepCsvHeader =
    "rho,one_over_1mrho,mean_phys_q,stderr_phys_q,mean_virt_q_avg,"
    "stderr_virt_q_avg,mean_decoding_delay,stderr_decoding_delay,"
    "mean_delivery_delay,stderr_delivery_delay,analytic_vq,analytic_Dj,"
    "status";

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::optional<double> fit_or_nothing(
    const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 3) return std::nullopt;
  for (auto [x, y] : pts)
    if (!(x > 0.0) || !(y > 0.0)) return std::nullopt;
  return growth_fit(pts);
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec) {
  if (!spec.slots_per_point.empty() && spec.slots_per_point.size() != 1 &&
      spec.slots_per_point.size() != spec.values.size())
    throw ConfigError("slots_per_point must have one entry or one per value");

  SweepResult result;
  result.points.resize(spec.values.size());

  auto config_for = [&](std::size_t i) {
    SimConfig cfg = spec.base;
    if (spec.param == SweepSpec::Param::lambda)
      cfg.lambda = spec.values[i];
    else
      cfg.mu = spec.values[i];
    if (!spec.slots_per_point.empty())
      cfg.slots = spec.slots_per_point.size() == 1 ? spec.slots_per_point[0]
                                                   : spec.slots_per_point[i];
    cfg.seed = Rng::mix(spec.base.seed, 0x5000 + i);
    return cfg;
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= spec.values.size()) return;
      SimConfig cfg = config_for(i);
      SweepPoint& pt = result.points[i];
      pt.value = spec.values[i];
      pt.rho = cfg.lambda / cfg.mu;
      if (pt.rho >= 1.0 || cfg.lambda >= 1.0 || cfg.lambda < 0.0) {
        pt.stable = false;
        continue;
      }
      pt.stable = true;
      auto outcome = simulate(cfg);
      pt.stats = std::move(outcome.stats);
      pt.report = outcome.report;
    }
  };

  int jobs = std::max(1, spec.jobs);
  if (jobs == 1 || spec.values.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::string csv;
  csv += "# seed=" + std::to_string(spec.base.seed);
  csv += " policy=" + std::string(to_string(spec.base.policy));
  csv += " coding=" + std::string(to_string(spec.base.coding));
  csv += " receivers=" + std::to_string(spec.base.receivers);
  csv += " param=";
  csv += spec.param == SweepSpec::Param::lambda ? "lambda" : "mu";
  csv += " revision=";
#ifdef FBNC_REVISION
  csv += FBNC_REVISION;
#else
  csv += "unknown";
#endif
  csv += "\n# horizon=";
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    if (i > 0) csv += ",";
    csv += std::to_string(config_for(i).slots);
  }
  csv += "\n";
  csv += kSweepCsvHeader;
  csv += "\n";

  std::vector<std::pair<double, double>> q_pts, dec_pts, del_pts;
  for (const auto& pt : result.points) {
    double x = 1.0 / (1.0 - pt.rho);
    csv += fmt(pt.rho) + "," + fmt(x) + ",";
    if (!pt.stable || !pt.stats.valid) {
      csv += ",,,,,,,,,,";
      csv += pt.stable ? "empty" : "unstable";
      csv += "\n";
      continue;
    }
    const SimConfig cfg = config_for(std::size_t(&pt - result.points.data()));
    const auto& s = pt.stats;
    csv += fmt(s.mean_phys_q) + "," + fmt(s.stderr_phys_q) + ",";
    csv += fmt(s.mean_virt_q_avg) + "," + fmt(s.stderr_virt_q_avg) + ",";
    csv += fmt(s.mean_decoding_delay) + "," + fmt(s.stderr_decoding_delay) +
           ",";
    csv += fmt(s.mean_delivery_delay) + "," + fmt(s.stderr_delivery_delay) +
           ",";
    csv += fmt(analytic_vq_mean(cfg.lambda, cfg.mu)) + ",";
    csv += fmt(analytic_delay_mean(cfg.lambda, cfg.mu)) + ",ok\n";
    q_pts.emplace_back(x, s.mean_phys_q);
    dec_pts.emplace_back(x, s.mean_decoding_delay);
    del_pts.emplace_back(x, s.mean_delivery_delay);
  }

  result.slope_phys_q = fit_or_nothing(q_pts);
  result.slope_decoding_delay = fit_or_nothing(dec_pts);
  result.slope_delivery_delay = fit_or_nothing(del_pts);
  auto footer = [&](const char* name, const std::optional<double>& v) {
    if (v) csv += std::string("# loglog_slope_") + name + "=" + fmt(*v) + "\n";
  };
  footer("phys_q", result.slope_phys_q);
  footer("decoding_delay", result.slope_decoding_delay);
  footer("delivery_delay", result.slope_delivery_delay);
  result.csv = std::move(csv);
  return result;
}

}  // namespace fbnc
