#include "fbnc/coding.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

#include "fbnc/errors.hpp"

namespace fbnc {

void Combo::add_term(PacketId id, std::uint32_t coeff) {
  if (coeff == 0) return;
  auto it = std::lower_bound(
      terms.begin(), terms.end(), id,
      [](const auto& t, PacketId v) { return t.first < v; });
  if (it != terms.end() && it->first == id)
    throw std::invalid_argument("duplicate term");
  terms.insert(it, {id, coeff});
}

std::string Combo::to_string() const {
  if (terms.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i > 0) out += "+";
    if (terms[i].second != 1)
      out += std::to_string(terms[i].second) + "*";
    out += "p" + std::to_string(terms[i].first);
  }
  return out;
}

const char* to_string(CodingModuleTag tag) {
  switch (tag) {
    case CodingModuleTag::silence: return "silence";
    case CodingModuleTag::random_lc: return "random";
    case CodingModuleTag::next_unseen: return "next_unseen";
    case CodingModuleTag::three_rx: return "three_rx";
    case CodingModuleTag::subspace_pick: return "subspace_pick";
  }
  return "?";
}

TransmitDecision random_combo(std::span<const PacketId> queue_entries,
                              const Field& f, Rng& rng) {
  TransmitDecision d;
  if (queue_entries.empty()) return d;
  d.module = CodingModuleTag::random_lc;
  for (PacketId id : queue_entries) {
    std::uint32_t c = rng.below(f.modulus());
    if (c != 0) d.combo.terms.emplace_back(id, c);
  }
  return d;
}

TransmitDecision next_unseen_combo(const std::vector<ReceiverKnowledge>& rxs,
                                   PacketId stream_len) {
  TransmitDecision d;
  if (rxs.empty()) return d;
  const Field& f = rxs.front().field();
  if (f.modulus() < rxs.size())
    throw ConfigError("next-unseen coding requires field size >= receivers");

  // Distinct next unseen indices, ascending, with the receivers waiting on
  // each; receivers with nothing unseen among arrived packets are excluded.
  std::vector<PacketId> transmit_set;
  std::vector<std::vector<std::size_t>> waiting;
  for (std::size_t r = 0; r < rxs.size(); ++r) {
    auto u = rxs[r].next_unseen(stream_len);
    if (!u) continue;
    auto it = std::lower_bound(transmit_set.begin(), transmit_set.end(), *u);
    std::size_t pos = std::size_t(it - transmit_set.begin());
    if (it == transmit_set.end() || *it != *u) {
      transmit_set.insert(it, *u);
      waiting.insert(waiting.begin() + std::ptrdiff_t(pos),
                     std::vector<std::size_t>{});
    }
    waiting[pos].push_back(r);
  }
  if (transmit_set.empty()) return d;

  d.module = CodingModuleTag::next_unseen;
  std::vector<std::uint32_t> alpha(transmit_set.size(), 0);
  for (std::size_t j = 0; j < transmit_set.size(); ++j) {
    // A receiver waiting on u_j has seen every earlier u_i; it will cancel
    // them with its witnesses. alpha_j must differ, for each such receiver,
    // from the coefficient of u_j in that cancellation.
    std::vector<bool> forbidden(f.modulus(), false);
    for (std::size_t r : waiting[j]) {
      std::uint32_t y = 0;
      for (std::size_t i = 0; i < j; ++i) {
        if (alpha[i] == 0) continue;
        y = f.add(y, f.mul(alpha[i], rxs[r].witness_coeff(transmit_set[i],
                                                          transmit_set[j])));
      }
      forbidden[y] = true;
    }
    std::uint32_t pick = 0;
    while (pick < f.modulus() && forbidden[pick]) ++pick;
    assert(pick < f.modulus());  // q >= n leaves a choice
    alpha[j] = pick;
  }
  assert(alpha[0] == 1);
  for (std::size_t j = 0; j < transmit_set.size(); ++j) {
    if (alpha[j] != 0) d.combo.terms.emplace_back(transmit_set[j], alpha[j]);
  }
  return d;
}

ThreeRxSets three_rx_sets(const ThreeRxLabels& labels,
                          const std::vector<ReceiverKnowledge>& rxs,
                          PacketId stream_len) {
  ThreeRxSets sets;
  const auto& rn = rxs[std::size_t(labels.no_deficit)];
  const auto& rd = rxs[std::size_t(labels.deficit)];

  const PacketId hi = std::min<PacketId>(labels.m + 1, stream_len);
  // Everything below both delivered fronts is decoded by N and D: that is
  // s1 territory and never transmitted.
  const PacketId lo =
      std::min(rn.delivered_front(), rd.delivered_front()) + 1;
  for (PacketId x = lo; x <= hi; ++x) {
    bool dn = rn.is_decoded(x);
    bool dd = rd.is_decoded(x);
    bool hd = rd.is_heard(x);
    if (dn && dd) continue;  // s1
    if (dn && hd) sets.s2.push_back(x);
    else if (dn) sets.s3.push_back(x);
    else if (dd) sets.s4.push_back(x);
    else if (hd) sets.s5.push_back(x);
    else sets.s6.push_back(x);
  }

  const PacketId p_next = labels.m + 1;
  if (p_next > stream_len) {
    sets.next = ThreeRxSets::NextPacket::not_arrived;
  } else {
    bool dn = rn.is_decoded(p_next);
    bool dd = rd.is_decoded(p_next);
    bool hd = rd.is_heard(p_next);
    if (dn && dd) sets.next = ThreeRxSets::NextPacket::in_s1;
    else if (dn && hd) sets.next = ThreeRxSets::NextPacket::in_s2;
    else if (dn) sets.next = ThreeRxSets::NextPacket::in_s3;
    else if (dd) sets.next = ThreeRxSets::NextPacket::in_s4;
    else sets.next = ThreeRxSets::NextPacket::other;
  }
  return sets;
}

namespace {

// Case 1: pair a packet decoded by N (s2, s3) with one decoded by D (s4);
// otherwise probe s5, s6, s2, s3, s4 in that order.
Combo case1_combo(const ThreeRxSets& s) {
  Combo c;
  if (!s.s2.empty() && !s.s4.empty()) {
    c.add_term(s.s2.front(), 1);
    c.add_term(s.s4.front(), 1);
  } else if (!s.s3.empty() && !s.s4.empty()) {
    c.add_term(s.s3.front(), 1);
    c.add_term(s.s4.front(), 1);
  } else if (!s.s5.empty()) {
    c.add_term(s.s5.front(), 1);
  } else if (!s.s6.empty()) {
    c.add_term(s.s6.front(), 1);
  } else if (!s.s2.empty()) {
    c.add_term(s.s2.front(), 1);
  } else if (!s.s3.empty()) {
    c.add_term(s.s3.front(), 1);
  } else if (!s.s4.empty()) {
    c.add_term(s.s4.front(), 1);
  }
  return c;
}

}  // namespace

TransmitDecision three_rx_combo(const ThreeRxLabels& labels,
                                const ThreeRxSets& sets,
                                const std::vector<ReceiverKnowledge>& rxs,
                                PacketId stream_len) {
  using Next = ThreeRxSets::NextPacket;
  TransmitDecision d;
  d.module = CodingModuleTag::three_rx;
  const PacketId p_next = labels.m + 1;
  const auto& rd = rxs[std::size_t(labels.deficit)];

  switch (sets.next) {
    case Next::not_arrived:
      d.combo = case1_combo(sets);
      break;
    case Next::in_s1:
      // Same pick as case 1 with p_{m+1} mixed in; the leader still needs
      // p_{m+1}, so it is sent alone when case 1 has nothing.
      d.combo = case1_combo(sets);
      d.combo.add_term(p_next, 1);
      break;
    case Next::in_s2: {
      d.combo.add_term(p_next, 1);
      const std::vector<PacketId>* pick = nullptr;
      if (!sets.s4.empty()) pick = &sets.s4;
      else if (!sets.s5.empty()) pick = &sets.s5;
      else if (!sets.s6.empty()) pick = &sets.s6;
      if (pick == &sets.s5) {
        // Both packets are heard-not-decoded at D, which may already know
        // one of the two possible sums; choose the coefficient that stays
        // innovative to D.
        PacketId partner = pick->front();
        std::uint32_t coeff = 0;
        for (std::uint32_t beta : {1u, 2u}) {
          Combo c = d.combo;
          c.add_term(partner, beta);
          if (!rd.knows(c)) {
            coeff = beta;
            break;
          }
        }
        assert(coeff != 0);
        d.combo.add_term(partner, coeff);
      } else if (pick != nullptr) {
        d.combo.add_term(pick->front(), 1);
      }
      break;
    }
    case Next::in_s3: {
      d.combo.add_term(p_next, 1);
      if (!sets.s4.empty()) d.combo.add_term(sets.s4.front(), 1);
      else if (!sets.s5.empty()) d.combo.add_term(sets.s5.front(), 1);
      else if (!sets.s6.empty()) d.combo.add_term(sets.s6.front(), 1);
      break;
    }
    case Next::in_s4: {
      d.combo.add_term(p_next, 1);
      if (!sets.s2.empty()) d.combo.add_term(sets.s2.front(), 1);
      else if (!sets.s3.empty()) d.combo.add_term(sets.s3.front(), 1);
      else if (!sets.s6.empty()) d.combo.add_term(sets.s6.front(), 1);
      break;
    }
    case Next::other:
      d.combo.add_term(p_next, 1);
      break;
  }
  (void)stream_len;
  if (d.combo.empty()) d.module = CodingModuleTag::silence;
  return d;
}

ThreeRxLabels three_rx_relabel(const std::vector<ReceiverKnowledge>& rxs,
                               std::uint64_t slot) {
  ThreeRxLabels labels;
  PacketId m = 0;
  for (const auto& rx : rxs) m = std::max<PacketId>(m, rx.rank());
  labels.m = m;

  int leader = -1;
  for (std::size_t i = 0; i < rxs.size(); ++i) {
    if (rxs[i].delivered_front() >= m) {  // decoded p_1..p_m
      leader = int(i);
      break;
    }
  }
  if (leader < 0)
    throw InvariantViolation("no receiver has decoded the full prefix", slot);
  labels.leader = leader;

  std::array<int, 2> rest{};
  std::size_t w = 0;
  for (int i = 0; i < int(rxs.size()); ++i) {
    if (i != leader) rest[w++] = i;
  }
  auto unsolved = [&](int i) {
    const auto& rx = rxs[std::size_t(i)];
    return rx.heard_count() > rx.decoded_count();
  };
  bool u0 = unsolved(rest[0]);
  bool u1 = unsolved(rest[1]);
  if (u1 && !u0) {
    labels.deficit = rest[1];
    labels.no_deficit = rest[0];
  } else {
    // Exactly-one case picks the unsolved receiver; the none/both cases
    // fall back to the lower index.
    labels.deficit = rest[0];
    labels.no_deficit = rest[1];
  }
  return labels;
}

}  // namespace fbnc
