#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fbnc/combo.hpp"
#include "fbnc/errors.hpp"
#include "fbnc/field.hpp"
#include "fbnc/knowledge.hpp"
#include "fbnc/queue_policies.hpp"

namespace fbnc {

enum class Policy {
  drop_when_decoded,    // alg1
  drop_common_knowledge,  // alg2a
  drop_when_seen,       // alg2b
};

enum class Coding { random_lc, next_unseen, three_rx };

const char* to_string(Policy p);
const char* to_string(Coding c);
Policy parse_policy(const std::string& s);  // throws ConfigError
Coding parse_coding(const std::string& s);

struct SimConfig {
  double lambda = 0.0;  // arrival probability per slot
  double mu = 0.0;      // per-receiver reception probability
  int receivers = 0;
  Policy policy = Policy::drop_when_seen;
  Coding coding = Coding::next_unseen;
  std::uint32_t q = 0;  // field modulus; 0 picks the module default
  std::uint64_t slots = 0;
  std::uint64_t seed = 1;
  bool verify = false;  // per-slot structural assertions + cross checks
  std::optional<std::uint64_t> warmup;  // override; default max(1e4, 1%)

  double rho() const { return lambda / mu; }
  std::uint32_t effective_q() const;
  std::uint64_t effective_warmup() const;

  // Hard constraint violations throw ConfigError naming the constraint;
  // returns soft warnings (e.g. rho >= 1).
  std::vector<std::string> validate() const;
};

// Per-slot record. Queue sizes appear both right after the arrival point
// and at the end of the slot (after drops); virtual queues are end-of-slot.
struct SlotTrace {
  std::uint64_t slot = 0;  // 1-based
  std::uint32_t arrivals = 0;
  PacketId stream_len = 0;  // A(t)
  TransmitDecision decision;
  std::vector<std::uint8_t> received;
  std::uint64_t phys_q_after_arrival = 0;
  std::uint64_t phys_q_end = 0;
  std::vector<std::uint64_t> virt_q;
  std::vector<std::vector<PacketId>> decoded_ids;  // per receiver, this slot
  std::vector<PacketId> delivered_to;  // per receiver; 0 = no front advance
  std::vector<PacketId> dropped;       // drop-when-seen queue only

  bool detailed = false;
  std::vector<PacketId> queue_after_arrival;
  std::vector<std::vector<PacketId>> seen_sets;     // end of slot
  std::vector<std::vector<PacketId>> decoded_sets;  // end of slot
};

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void on_slot(const SlotTrace& t) = 0;
};

struct RunReport {
  std::uint64_t slots = 0;
  std::uint64_t arrivals = 0;
  std::uint64_t transmissions = 0;

  // Innovation guarantee accounting over receivers with a deficit. In
  // verify mode every deficit receiver is tested each slot; otherwise only
  // successful receptions are observed.
  std::uint64_t innovation_checks = 0;
  std::uint64_t innovation_violations = 0;

  std::uint64_t queue_bound_violations = 0;   // Q <= sum of virtual queues
  std::uint64_t exact_size_violations = 0;    // Q == dim V - dim V_common
  std::uint64_t h_rank_violations = 0;        // stored combos dependent
  std::uint64_t combo_index_violations = 0;   // index beyond m+1
  std::uint64_t mixing_violations = 0;        // >2 undecoded per receiver
  std::uint64_t leader_prefix_violations = 0; // no full-prefix decoder
  std::uint64_t unsolved_violations = 0;      // two unsolved non-leaders
  std::uint64_t decode_event_violations = 0;  // decoded != seen at event
  std::uint64_t seen_order_violations = 0;    // next unseen did not advance
  std::uint64_t drop_order_violations = 0;    // drops out of index order

  std::uint64_t structural_violations() const {
    return queue_bound_violations + exact_size_violations +
           h_rank_violations + combo_index_violations + mixing_violations +
           leader_prefix_violations + unsolved_violations +
           decode_event_violations + seen_order_violations +
           drop_order_violations;
  }
};

// Decoding-event predicate: a successful reception decodes
// everything seen when it empties the sender's virtual queue or when the
// receiver was a leader at the start of the slot.
inline bool decode_event_check(bool received, bool vq_empty_after,
                               bool was_leader_at_slot_start) {
  return received && (vq_empty_after || was_leader_at_slot_start);
}

// Slotted broadcast-erasure simulation: Bernoulli arrivals, one coded
// transmission per slot, i.i.d. per-receiver erasures, perfect same-slot
// feedback, end-of-slot queue update and measurement.
class Simulator {
 public:
  explicit Simulator(const SimConfig& cfg);

  // Fully deterministic given cfg.seed.
  RunReport run(std::span<TraceSink* const> sinks);

  // Same pipeline with scripted arrivals (count per slot) and receptions
  // (receptions[j][t] for slot t+1). Scripts must cover the horizon.
  RunReport run_scripted(const std::vector<std::uint8_t>& arrivals,
                         const std::vector<std::vector<std::uint8_t>>& receptions,
                         std::span<TraceSink* const> sinks);

  RunReport run(TraceSink& sink);
  RunReport run_scripted(const std::vector<std::uint8_t>& arrivals,
                         const std::vector<std::vector<std::uint8_t>>& receptions,
                         TraceSink& sink);

  // Capture queue contents and per-receiver sets in every SlotTrace.
  void set_detailed(bool on) { detailed_ = on; }

  struct Source;

 private:
  RunReport run_impl(Source& src, std::span<TraceSink* const> sinks);
  RunReport run_light(Source& src, std::span<TraceSink* const> sinks);
  bool light_eligible() const;

  SimConfig cfg_;
  std::vector<std::string> warnings_;
  bool detailed_ = false;
};

}  // namespace fbnc
