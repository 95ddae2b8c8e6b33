#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fbnc {

// 1-based arrival index of a packet at the sender.
using PacketId = std::uint64_t;

// Sparse coefficient vector over stream coordinates: the transmitted linear
// combination. Terms are sorted by packet id and carry nonzero coefficients.
// An empty term list is the zero combination (silence).
struct Combo {
  std::vector<std::pair<PacketId, std::uint32_t>> terms;

  bool empty() const { return terms.empty(); }
  PacketId max_id() const { return terms.empty() ? 0 : terms.back().first; }

  static Combo single(PacketId id, std::uint32_t coeff = 1) {
    Combo c;
    c.terms.emplace_back(id, coeff);
    return c;
  }
  void add_term(PacketId id, std::uint32_t coeff);  // keeps terms sorted

  std::string to_string() const;  // "p1+2*p3", "-" when empty
  bool operator==(const Combo&) const = default;
};

enum class CodingModuleTag {
  silence,
  random_lc,       // random combination of the whole queue
  next_unseen,     // deterministic combination of next unseen packets
  three_rx,        // three-receiver delay module over GF(3)
  subspace_pick,   // drop-common-knowledge policy's internal selection
};

const char* to_string(CodingModuleTag tag);

// One slot's transmission decision. `combo.empty()` means nothing is sent.
struct TransmitDecision {
  Combo combo;
  CodingModuleTag module = CodingModuleTag::silence;

  bool silent() const { return combo.empty(); }
  std::size_t involved() const { return combo.terms.size(); }
};

}  // namespace fbnc
