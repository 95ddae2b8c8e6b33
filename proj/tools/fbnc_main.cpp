// Command-line front end: single runs, load sweeps with CSV output, and the
// six-slot drop-when-seen replay checked against its golden transcript.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fbnc/config.hpp"
#include "fbnc/metrics.hpp"
#include "fbnc/sweep.hpp"
#include "fbnc/table1.hpp"

namespace {

struct Flags {
  std::optional<double> lambda, mu;
  std::optional<int> receivers;
  std::optional<std::string> policy, coding;
  std::optional<std::uint32_t> q;
  std::optional<std::uint64_t> slots, seed, warmup;
  bool verify = false;
  std::string config_file;
};

void add_common_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_file,
                  "config file with 'key = value' lines; flags override");
  cmd->add_option("--lambda", f.lambda, "arrival probability per slot");
  cmd->add_option("--mu", f.mu, "per-receiver reception probability");
  cmd->add_option("--receivers", f.receivers, "number of receivers");
  cmd->add_option("--policy", f.policy,
                  "queue policy: alg1 (drop-when-decoded), alg2a "
                  "(drop-common-knowledge), alg2b (drop-when-seen)");
  cmd->add_option("--coding", f.coding,
                  "coding module: random | next_unseen | three_rx "
                  "(ignored by alg2a, which picks its own combination)");
  cmd->add_option("--q", f.q, "field modulus (prime); 0 = module default");
  cmd->add_option("--slots", f.slots, "horizon in slots");
  cmd->add_option("--seed", f.seed, "PRNG seed");
  cmd->add_option("--warmup", f.warmup,
                  "slots excluded from statistics (default max(1e4, 1%))");
  cmd->add_flag("--verify", f.verify,
                "per-slot structural assertions and cross checks");
}

fbnc::SimConfig build_config(const Flags& f) {
  fbnc::SimConfig cfg;
  cfg.lambda = 0.4;
  cfg.mu = 0.5;
  cfg.receivers = 2;
  cfg.policy = fbnc::Policy::drop_when_seen;
  cfg.coding = fbnc::Coding::next_unseen;
  cfg.slots = 100000;
  cfg.seed = 1;
  if (!f.config_file.empty())
    fbnc::apply_config_entries(cfg, fbnc::read_config_file(f.config_file));
  fbnc::apply_env_overrides(cfg);
  if (f.lambda) cfg.lambda = *f.lambda;
  if (f.mu) cfg.mu = *f.mu;
  if (f.receivers) cfg.receivers = *f.receivers;
  if (f.policy) cfg.policy = fbnc::parse_policy(*f.policy);
  if (f.coding) cfg.coding = fbnc::parse_coding(*f.coding);
  if (f.q) cfg.q = *f.q;
  if (f.slots) cfg.slots = *f.slots;
  if (f.seed) cfg.seed = *f.seed;
  if (f.warmup) cfg.warmup = *f.warmup;
  if (f.verify) cfg.verify = true;
  return cfg;
}

struct TraceCsvSink final : fbnc::TraceSink {
  std::ofstream out;

  TraceCsvSink(const std::string& path, int n) : out(path) {
    if (!out) throw fbnc::ConfigError("cannot open trace file: " + path);
    out << "slot,arrivals,stream_len,sent,received,phys_q_after_arrival,"
           "phys_q_end";
    for (int j = 0; j < n; ++j) out << ",virt_q_" << (j + 1);
    out << ",delivered_to\n";
  }

  void on_slot(const fbnc::SlotTrace& t) override {
    out << t.slot << "," << t.arrivals << "," << t.stream_len << ","
        << t.decision.combo.to_string() << ",";
    for (auto r : t.received) out << (r ? '1' : '0');
    out << "," << t.phys_q_after_arrival << "," << t.phys_q_end;
    for (auto v : t.virt_q) out << "," << v;
    out << ",";
    for (std::size_t j = 0; j < t.delivered_to.size(); ++j) {
      if (j > 0) out << ";";
      out << t.delivered_to[j];
    }
    out << "\n";
  }
};

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoull(item));
  }
  return out;
}

int cmd_run(const Flags& flags, const std::string& trace_path) {
  fbnc::SimConfig cfg = build_config(flags);
  auto warnings = cfg.validate();
  std::cout << "config: " << fbnc::describe(cfg) << "\n";
  for (const auto& w : warnings) std::cout << "warning: " << w << "\n";

  fbnc::Simulator sim(cfg);
  fbnc::Aggregator agg(fbnc::Aggregator::from_config(cfg));
  std::vector<fbnc::TraceSink*> sinks{&agg};
  std::optional<TraceCsvSink> csv;
  if (!trace_path.empty()) {
    sim.set_detailed(false);
    csv.emplace(trace_path, cfg.receivers);
    sinks.push_back(&*csv);
  }
  fbnc::RunReport rep = sim.run(sinks);
  fbnc::SummaryStats s = agg.finish();

  std::cout << "slots=" << rep.slots << " arrivals=" << rep.arrivals
            << " transmissions=" << rep.transmissions << "\n";
  if (!s.valid) {
    std::cout << "no post-warmup samples\n";
    return 0;
  }
  std::cout << "phys_q mean=" << s.mean_phys_q << " (stderr "
            << s.stderr_phys_q << "), end-of-slot mean=" << s.mean_phys_q_end
            << "\n";
  std::cout << "virt_q avg mean=" << s.mean_virt_q_avg << " (stderr "
            << s.stderr_virt_q_avg << ")\n";
  std::cout << "decoding delay mean=" << s.mean_decoding_delay
            << " delivery delay mean=" << s.mean_delivery_delay
            << " undelivered=" << s.undelivered << "\n";
  std::cout << "busy period mean=" << s.mean_busy_period << " over "
            << s.busy_periods << " periods\n";
  std::cout << "innovation checks=" << rep.innovation_checks
            << " violations=" << rep.innovation_violations << "\n";
  std::cout << "structural violations=" << rep.structural_violations()
            << "\n";
  return 0;
}

int cmd_sweep(const Flags& flags, const std::string& param,
              const std::string& values, const std::string& slots_list,
              const std::string& out_path, int jobs) {
  fbnc::SweepSpec spec;
  spec.base = build_config(flags);
  if (param == "lambda") spec.param = fbnc::SweepSpec::Param::lambda;
  else if (param == "mu") spec.param = fbnc::SweepSpec::Param::mu;
  else throw fbnc::ConfigError("sweep param must be lambda or mu");
  spec.values = parse_double_list(values);
  if (!slots_list.empty()) spec.slots_per_point = parse_u64_list(slots_list);
  spec.jobs = jobs;
  // Validate the base shape once (each point revalidates with its value).
  if (!spec.values.empty()) {
    fbnc::SimConfig probe = spec.base;
    (spec.param == fbnc::SweepSpec::Param::lambda ? probe.lambda : probe.mu) =
        spec.values.front();
    if (probe.lambda / probe.mu < 1.0) probe.validate();
  }
  fbnc::SweepResult result = fbnc::run_sweep(spec);
  if (out_path.empty()) {
    std::cout << result.csv;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw fbnc::ConfigError("cannot open output: " + out_path);
    out << result.csv;
    std::cout << "wrote " << result.points.size() << " points to " << out_path
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "fbnc: feedback-based online network coding over a slotted broadcast "
      "erasure channel"};
  app.require_subcommand(1);

  Flags run_flags;
  std::string trace_path;
  CLI::App* run = app.add_subcommand("run", "single simulation");
  add_common_flags(run, run_flags);
  run->add_option("--trace", trace_path, "write a per-slot CSV trace");

  Flags sweep_flags;
  std::string param = "lambda", values, slots_list, out_path;
  int jobs = 1;
  CLI::App* sweep =
      app.add_subcommand("sweep", "one simulation per load point, CSV out");
  add_common_flags(sweep, sweep_flags);
  sweep->add_option("--param", param, "swept parameter: lambda | mu");
  sweep->add_option("--values", values, "comma-separated parameter values")
      ->required();
  sweep->add_option("--slots-per-point", slots_list,
                    "comma-separated horizons (one, or one per value)");
  sweep->add_option("--out", out_path, "output CSV path (default stdout)");
  sweep->add_option("--jobs", jobs, "parallel workers");

  std::string golden_path = std::string(FBNC_DATA_DIR) + "/table1_golden.txt";
  CLI::App* replay = app.add_subcommand(
      "replay-table1", "six-slot drop-when-seen replay vs golden transcript");
  replay->add_option("--golden", golden_path, "golden transcript path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_flags, trace_path);
    if (sweep->parsed())
      return cmd_sweep(sweep_flags, param, values, slots_list, out_path, jobs);
    if (replay->parsed()) return fbnc::replay_table1(std::cout, golden_path);
  } catch (const fbnc::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 2;
  } catch (const fbnc::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
