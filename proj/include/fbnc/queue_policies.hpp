#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "fbnc/combo.hpp"
#include "fbnc/field.hpp"
#include "fbnc/knowledge.hpp"
#include "fbnc/linalg.hpp"

namespace fbnc {

// Per-receiver degrees-of-freedom backlog: dim V(sender) - dim V(receiver).
struct VirtualQueueView {
  std::vector<std::uint64_t> sizes;

  bool all_empty() const {
    for (auto s : sizes)
      if (s != 0) return false;
    return true;
  }
  std::uint64_t sum() const {
    std::uint64_t t = 0;
    for (auto s : sizes) t += s;
    return t;
  }
};

VirtualQueueView virtual_queues(std::uint64_t sender_dim,
                                const std::vector<std::uint64_t>& ranks);
VirtualQueueView virtual_queues(std::uint64_t sender_dim,
                                const std::vector<ReceiverKnowledge>& rxs);

// Drop-when-decoded queue. A receiver's entries are marked decoded only at
// the instants its virtual queue empties; a packet leaves once every
// receiver has marked it. The queue is always a contiguous index range.
class DropWhenDecodedQueue {
 public:
  explicit DropWhenDecodedQueue(int receivers)
      : mark_(std::size_t(receivers), 0) {}

  void on_arrivals(std::uint64_t count) { arrived_ += count; }

  // End-of-slot update; vq_empty[j] says receiver j's virtual queue is zero
  // after this slot's reception. Returns the ids dropped.
  std::pair<PacketId, PacketId> update(const std::vector<bool>& vq_empty);

  std::uint64_t size() const { return arrived_ - dropped_front_; }
  PacketId first() const { return dropped_front_ + 1; }  // valid if nonempty
  PacketId last() const { return arrived_; }
  std::uint64_t arrived() const { return arrived_; }

 private:
  std::uint64_t arrived_ = 0;
  PacketId dropped_front_ = 0;
  std::vector<PacketId> mark_;  // per receiver: marked-decoded up to here
};

// Drop-when-seen queue. Keeps original packets plus, per receiver, the RREF
// basis of its incremental knowledge over the current queue columns. A
// packet leaves once it is a pivot column for every receiver.
class DropWhenSeenQueue {
 public:
  DropWhenSeenQueue(Field f, int receivers);

  void on_arrivals(std::uint64_t count);

  // End-of-slot update: fold the received combination into each successful
  // receiver's basis, then drop the commonly seen packets. The combination
  // may only involve packets currently in the queue. Returns dropped ids,
  // ascending.
  std::vector<PacketId> update(const std::vector<bool>& received,
                               const Combo& g);

  std::uint64_t size() const { return entries_.size(); }
  const std::deque<PacketId>& entries() const { return entries_; }
  std::uint64_t arrived() const { return arrived_; }

  // Packets corresponding to pivot columns of receiver j's basis.
  std::vector<PacketId> seen_by(int j) const;
  const RrefBasis& basis_of(int j) const { return bj_[std::size_t(j)]; }

 private:
  std::vector<std::uint32_t> to_local(const Combo& g) const;

  Field f_;
  std::uint64_t arrived_ = 0;
  std::deque<PacketId> entries_;  // ascending ids
  std::vector<RrefBasis> bj_;     // columns track entries_
};

// Drop-common-knowledge queue. Entries are stored linear combinations; each
// slot ends by splitting off the subspace known to every receiver and
// re-expressing queue and receiver bases in the remainder's coordinates.
class DropCommonKnowledgeQueue {
 public:
  DropCommonKnowledgeQueue(Field f, int receivers);

  void on_arrivals(std::uint64_t count);

  std::uint64_t size() const { return rows_global_.size(); }
  std::uint64_t arrived() const { return arrived_; }

  // The slot's transmission: a vector of span(B) outside every strictly
  // smaller receiver subspace, in local (queue) coordinates. nullopt when
  // the queue is empty.
  std::optional<CoeffVector> choose_transmit() const;

  // Local coefficients -> combination over original packet ids.
  Combo to_global(const CoeffVector& g_local) const;

  // Append g to the basis of every receiver that got the transmission.
  void feedback(const std::vector<bool>& received, const CoeffVector& g_local);

  // Steps 6-8: split off the common knowledge, rebuild the queue from the
  // completion, and re-express every receiver basis in the new coordinates.
  void end_of_slot();

  // Global coefficient vectors of the current queue contents (rows of H).
  const std::vector<std::vector<std::uint32_t>>& global_rows() const {
    return rows_global_;
  }
  const RrefBasis& basis_of(int j) const { return bj_[std::size_t(j)]; }

  bool h_has_full_row_rank() const;

 private:
  Field f_;
  int n_;
  std::uint64_t arrived_ = 0;
  std::vector<std::vector<std::uint32_t>> rows_global_;  // H, cols 0..arrived
  std::vector<RrefBasis> bj_;  // local coords, ncols = rows_global_.size()
};

}  // namespace fbnc
