#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "fbnc/simulator.hpp"

namespace fbnc {

// Steady-state P[virtual queue = k] for the slotted birth-death chain:
// (1-alpha) alpha^k with alpha = lambda(1-mu) / (mu(1-lambda)).
double analytic_pi(std::uint64_t k, double lambda, double mu);

// Expected virtual-queue size (1-mu) rho / (1-rho).
double analytic_vq_mean(double lambda, double mu);

// Expected time from an arrival to the next emptying of one virtual queue:
// ((1-mu)/mu) rho / (1-rho)^2.
double analytic_delay_mean(double lambda, double mu);

// Expected first passage time k/(mu-lambda) from state k to empty.
double analytic_first_passage(std::uint64_t k, double lambda, double mu);

// Least-squares slope of log y against log x. Needs >= 3 points, all
// coordinates positive.
double growth_fit(const std::vector<std::pair<double, double>>& points);

// Geometric-mean coefficient c for a y ~ c * x^p fit.
double power_coefficient(const std::vector<std::pair<double, double>>& points,
                         double p);

// Total-variation distance between an empirical occupancy histogram
// (counts by state) and the analytic steady-state distribution.
double tv_distance_to_pi(const std::vector<std::uint64_t>& histogram,
                         double lambda, double mu);

struct SummaryStats {
  bool valid = false;  // false when no slot survived the warmup cut
  std::uint64_t slots_measured = 0;

  // Queue size right after the arrival point (the per-slot table
  // convention) and at the end of the slot.
  double mean_phys_q = 0.0;
  double var_phys_q = 0.0;
  double stderr_phys_q = 0.0;
  double mean_phys_q_end = 0.0;

  std::vector<double> mean_virt_q;  // per receiver
  double mean_virt_q_avg = 0.0;
  double var_virt_q_avg = 0.0;
  double stderr_virt_q_avg = 0.0;
  std::vector<std::uint64_t> vq_histogram;  // pooled over receivers

  // Per-packet delays, packets arriving after the warmup only; the arrival
  // slot itself is excluded from the count.
  std::vector<double> mean_decoding_delay_rx;
  std::vector<double> mean_delivery_delay_rx;
  double mean_decoding_delay = 0.0;
  double stderr_decoding_delay = 0.0;
  double mean_delivery_delay = 0.0;
  double stderr_delivery_delay = 0.0;
  std::uint64_t decoded_samples = 0;
  std::uint64_t delivered_samples = 0;
  std::uint64_t undelivered = 0;  // summed over receivers at the horizon

  // Time until delivered by every receiver.
  double mean_system_delay = 0.0;
  std::uint64_t system_samples = 0;

  double mean_busy_period = 0.0;
  std::uint64_t busy_periods = 0;
};

// Folds slot traces into summary statistics. Works online; merge order is
// the trace order.
class Aggregator : public TraceSink {
 public:
  struct Options {
    int receivers = 1;
    std::uint64_t warmup = 0;
    // Baseline semantics: decode and delivery are booked at the virtual-queue
    // emptying instants rather than at the exact RREF events.
    bool emptying_delays = false;
    std::uint64_t batch_slots = 10000;
  };

  explicit Aggregator(Options opt);
  static Options from_config(const SimConfig& cfg);

  void on_slot(const SlotTrace& t) override;
  SummaryStats finish() const;

 private:
  void record_delivery(std::size_t j, PacketId id, std::uint64_t slot);
  void record_decode(std::size_t j, PacketId id, std::uint64_t slot);
  void prune_window();

  Options opt_;
  std::uint64_t slots_seen_ = 0;
  std::uint64_t measured_ = 0;

  // Arrival slots and outstanding-receiver counts for packets not yet
  // delivered everywhere; entries below every delivered front are pruned,
  // so memory follows the backlog instead of the horizon.
  PacketId window_base_ = 0;  // ids <= base are pruned
  std::deque<std::uint64_t> arrival_window_;
  std::deque<std::uint8_t> remaining_window_;
  std::uint64_t total_arrived_ = 0;
  PacketId first_counted_ = 1;  // first packet arriving after the warmup

  double sum_q_aa_ = 0, sumsq_q_aa_ = 0, sum_q_end_ = 0;
  std::vector<double> sum_vq_;
  std::vector<std::uint64_t> vq_hist_;

  std::vector<double> batch_means_q_, batch_means_vq_;
  double batch_q_ = 0, batch_vq_ = 0;
  std::uint64_t batch_fill_ = 0;

  std::vector<double> dec_sum_, del_sum_;
  std::vector<std::uint64_t> dec_cnt_, del_cnt_;
  std::vector<PacketId> delivered_front_;  // per receiver
  double sys_sum_ = 0;
  std::uint64_t sys_cnt_ = 0;

  std::vector<double> dec_batch_sum_, del_batch_sum_;
  std::vector<std::uint64_t> dec_batch_cnt_, del_batch_cnt_;

  std::uint64_t busy_len_ = 0;
  double busy_sum_ = 0;
  std::uint64_t busy_cnt_ = 0;
};

// Convenience: run config through the simulator into an aggregator.
struct SimulationOutcome {
  RunReport report;
  SummaryStats stats;
};
SimulationOutcome simulate(const SimConfig& cfg);

// Per-packet delay bookkeeping for small runs: when each receiver decoded
// and delivered the packet (0 = still pending at the horizon). Uses the
// exact per-receiver events.
struct DelayRecord {
  PacketId packet = 0;
  std::uint64_t arrival_slot = 0;
  std::vector<std::uint64_t> decode_slot;
  std::vector<std::uint64_t> delivery_slot;
};

class DelayRecorder : public TraceSink {
 public:
  explicit DelayRecorder(int receivers) : n_(std::size_t(receivers)) {}
  void on_slot(const SlotTrace& t) override;
  const std::vector<DelayRecord>& records() const { return records_; }

 private:
  std::size_t n_;
  std::vector<DelayRecord> records_;  // by packet id
  std::vector<PacketId> front_;
};

// Empirical first-passage times of one receiver's virtual queue: each time
// the queue enters state k (with no measurement pending), count the slots
// until it next empties.
class FirstPassageSink : public TraceSink {
 public:
  FirstPassageSink(std::vector<std::uint64_t> ks, std::size_t receiver = 0,
                   std::uint64_t warmup = 0);
  void on_slot(const SlotTrace& t) override;
  double mean(std::uint64_t k) const;
  std::uint64_t count(std::uint64_t k) const;

 private:
  std::vector<std::uint64_t> ks_;
  std::size_t rx_;
  std::uint64_t warmup_;
  std::vector<std::optional<std::uint64_t>> start_;
  std::vector<double> sum_;
  std::vector<std::uint64_t> cnt_;
};

}  // namespace fbnc
