#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fbnc/combo.hpp"
#include "fbnc/field.hpp"
#include "fbnc/linalg.hpp"

namespace fbnc {

// A receiver's cumulative knowledge space, kept as an RREF basis over the
// packet stream. Exposes the seen / decoded / heard-of sets, witnesses and
// the next unseen index.
//
// Packets 1..delivered_front() are decoded and delivered in order; their
// basis rows are unit vectors and are retired from storage, so the live
// window only covers the undelivered suffix of the stream. All queries are
// still answered over the full stream.
class ReceiverKnowledge {
 public:
  explicit ReceiverKnowledge(Field f) : f_(f) {}

  const Field& field() const { return f_; }
  PacketId stream_len() const { return stream_len_; }
  PacketId delivered_front() const { return front_; }
  std::uint64_t rank() const { return front_ + rows_.size(); }
  std::uint64_t decoded_count() const { return decoded_count_; }
  std::uint64_t heard_count() const { return heard_count_; }

  // Widen the coordinate system: `count` new packets arrived at the sender.
  void on_arrivals(std::uint64_t count);

  struct Events {
    bool innovative = false;
    std::vector<PacketId> decoded;   // newly decoded, ascending
    PacketId delivered_to = 0;       // new front if it advanced, else 0
  };

  // Gaussian elimination of a received combination into the basis.
  // Non-innovative input leaves the rank unchanged.
  Events incorporate(const Combo& combo);

  bool is_seen(PacketId k) const;
  bool is_decoded(PacketId k) const;
  bool is_heard(PacketId k) const;

  // Smallest unseen index <= stream_len; nullopt when every arrived packet
  // has been seen.
  std::optional<PacketId> next_unseen(PacketId stream_len) const;

  // The unique known combination p_k + q with q over unseen higher-index
  // packets. k must be seen.
  Combo witness(PacketId k) const;

  // Coefficient of packet `at` in witness(k); k must be seen.
  std::uint32_t witness_coeff(PacketId k, PacketId at) const;

  // True iff the combination already lies in the knowledge space.
  bool knows(const Combo& combo) const;

  // Full-set views; cost is linear in the stream, intended for small runs
  // and tests.
  std::vector<PacketId> seen_packets() const;
  std::pair<std::vector<PacketId>, std::vector<PacketId>> decoded_and_heard()
      const;

  // Equivalence classes over GF(3): x ~ y when x + y or x + 2y
  // is known. The class anchored at the fictitious zero packet is the
  // decoded set; unheard packets are singletons.
  struct EquivalencePartition {
    std::vector<PacketId> zero_class;                 // decoded packets
    std::vector<std::vector<PacketId>> mixed_classes; // heard, undecoded
    std::vector<PacketId> singletons;                 // arrived, unheard
  };
  EquivalencePartition equivalence_classes() const;

  // Dense copy of the basis over columns 1..stream_len (tests / verify).
  RrefBasis full_basis() const;
  // Dense copy over columns base+1..stream_len; requires base <= front.
  RrefBasis window_basis(PacketId base) const;

 private:
  std::size_t col_of(PacketId k) const { return std::size_t(k - origin_ - 1); }
  PacketId id_of(std::size_t col) const { return origin_ + 1 + col; }
  std::size_t width() const { return std::size_t(stream_len_ - origin_); }
  void compact();
  void refresh_pivot_map(std::size_t from_row);

  Field f_;
  PacketId stream_len_ = 0;
  PacketId front_ = 0;   // delivered prefix, retired
  PacketId origin_ = 0;  // storage column 0 corresponds to packet origin_+1
  std::uint64_t decoded_count_ = 0;
  std::uint64_t heard_count_ = 0;
  PacketId min_unseen_ = 1;

  std::vector<std::vector<std::uint32_t>> rows_;  // RREF rows, sorted by pivot
  std::vector<std::size_t> row_pivot_;
  static constexpr std::int32_t kNoRow = -1;
  std::vector<std::int32_t> pivot_row_of_col_;
  std::vector<std::uint8_t> decoded_col_;
  std::vector<std::uint8_t> heard_col_;
  std::vector<std::uint32_t> scratch_;
};

}  // namespace fbnc
