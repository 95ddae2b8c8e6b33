#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fbnc/combo.hpp"
#include "fbnc/field.hpp"
#include "fbnc/knowledge.hpp"
#include "fbnc/rng.hpp"

namespace fbnc {

// Random linear combination of everything currently queued; silence on an
// empty queue. Coefficients are i.i.d. uniform over GF(q).
TransmitDecision random_combo(std::span<const PacketId> queue_entries,
                              const Field& f, Rng& rng);

// Deterministic combination of the receivers' next unseen packets.
// Coefficients are chosen (smallest valid element first) so every
// successful reception makes the receiver see its next unseen packet.
// Receivers whose next unseen packet has not arrived are left out; silence
// when no one is waiting. Requires field size >= number of receivers.
TransmitDecision next_unseen_combo(const std::vector<ReceiverKnowledge>& rxs,
                                   PacketId stream_len);

// ---- Three-receiver delay module (GF(3)) ----

// Role assignment carried across slots: leader, no-deficit and deficit
// receivers, and m = the maximum rank at the last relabeling.
struct ThreeRxLabels {
  int leader = 0;
  int no_deficit = 1;
  int deficit = 2;
  PacketId m = 0;
};

// Partition of the universe {p_1..p_m} (plus p_{m+1} once arrived) around
// the decoded / heard-of sets of the two non-leaders. s1 (decoded by both)
// is implicit; the transmit rules never pick packets from it.
struct ThreeRxSets {
  enum class NextPacket { not_arrived, in_s1, in_s2, in_s3, in_s4, other };
  NextPacket next = NextPacket::not_arrived;
  std::vector<PacketId> s2, s3, s4, s5, s6;  // ascending
};

ThreeRxSets three_rx_sets(const ThreeRxLabels& labels,
                          const std::vector<ReceiverKnowledge>& rxs,
                          PacketId stream_len);

TransmitDecision three_rx_combo(const ThreeRxLabels& labels,
                                const ThreeRxSets& sets,
                                const std::vector<ReceiverKnowledge>& rxs,
                                PacketId stream_len);

// Post-feedback step: recompute m, pick the lowest-indexed receiver that
// has decoded the full prefix as leader, and hand the deficit label to the
// non-leader with a non-empty unsolved set (lowest index on ties). Throws
// InvariantViolation when no receiver has decoded p_1..p_m.
ThreeRxLabels three_rx_relabel(const std::vector<ReceiverKnowledge>& rxs,
                               std::uint64_t slot);

}  // namespace fbnc
