#include <doctest.h>

#include <array>

#include "fbnc/coding.hpp"
#include "fbnc/errors.hpp"
#include "support/oracles.hpp"

using namespace fbnc;
using namespace fbnc::test;

namespace {

Combo combo(std::initializer_list<std::pair<PacketId, std::uint32_t>> terms) {
  Combo c;
  for (auto [id, co] : terms) c.terms.emplace_back(id, co);
  return c;
}

ReceiverKnowledge make_rx(const Field& f, PacketId stream,
                          std::initializer_list<Combo> knows) {
  ReceiverKnowledge rx(f);
  rx.on_arrivals(stream);
  for (const auto& c : knows) rx.incorporate(c);
  return rx;
}

}  // namespace

TEST_CASE("random combination over the queue") {
  Field f(257);
  Rng rng(42, 2);
  std::vector<PacketId> empty;
  CHECK(random_combo(empty, f, rng).silent());

  std::vector<PacketId> one{1};
  for (int i = 0; i < 20; ++i) {
    auto d = random_combo(one, f, rng);
    if (!d.silent()) {
      CHECK(d.combo.terms.size() == 1);
      CHECK(d.combo.terms[0].first == 1);
      CHECK(d.combo.terms[0].second < 257);
    }
  }
}

TEST_CASE("random combination is reproducible for a fixed seed") {
  Field f(257);
  Rng rng(7, 2);
  std::vector<PacketId> q{1, 2, 3};
  auto d = random_combo(q, f, rng);
  // golden coefficients recorded from the first run with this seed
  REQUIRE(d.combo.terms.size() == 3);
  CHECK(d.combo == combo({{1, 104}, {2, 35}, {3, 181}}));
}

TEST_CASE("next-unseen coding reproduces the two-receiver xor rule") {
  Field f(2);
  // slot 1: only p1 arrived, nobody has seen anything
  {
    std::vector<ReceiverKnowledge> rxs{make_rx(f, 1, {}), make_rx(f, 1, {})};
    auto d = next_unseen_combo(rxs, 1);
    CHECK(d.combo == combo({{1, 1}}));
  }
  // A decoded p1, B empty, p2 arrived: send p1+p2
  {
    std::vector<ReceiverKnowledge> rxs{make_rx(f, 2, {combo({{1, 1}})}),
                                       make_rx(f, 2, {})};
    auto d = next_unseen_combo(rxs, 2);
    CHECK(d.combo == combo({{1, 1}, {2, 1}}));
  }
  // both wait for p3: send it alone
  {
    std::vector<ReceiverKnowledge> rxs{
        make_rx(f, 3, {combo({{1, 1}}), combo({{2, 1}})}),
        make_rx(f, 3, {combo({{1, 1}, {2, 1}}), combo({{2, 1}, {3, 1}})})};
    CHECK(rxs[1].seen_packets() == std::vector<PacketId>{1, 2});
    auto d = next_unseen_combo(rxs, 3);
    CHECK(d.combo == combo({{3, 1}}));
  }
  // everyone has seen everything: silence
  {
    std::vector<ReceiverKnowledge> rxs{make_rx(f, 1, {combo({{1, 1}})}),
                                       make_rx(f, 1, {combo({{1, 1}})})};
    CHECK(next_unseen_combo(rxs, 1).silent());
  }
}

TEST_CASE("next-unseen coefficient rule picks the smallest valid element") {
  // A has seen p1 with witness p1+p2 over GF(3); B waits for p1. The
  // coefficient of p2 must differ from the witness cancellation, and 0 is
  // valid: sending plain p1 lets A see p2 after subtracting its witness.
  Field f(3);
  std::vector<ReceiverKnowledge> rxs{
      make_rx(f, 2, {combo({{1, 1}, {2, 1}})}),  // A: seen p1, waits for p2
      make_rx(f, 2, {}),                          // B: waits for p1
  };
  auto d = next_unseen_combo(rxs, 2);
  CHECK(d.combo == combo({{1, 1}}));

  auto ev = rxs[0].incorporate(d.combo);
  CHECK(ev.innovative);
  CHECK(rxs[0].is_seen(2));
}

TEST_CASE("next-unseen reception reveals the next unseen packet") {
  Rng rng(5, 77);
  for (std::uint32_t q : {2u, 3u, 5u}) {
    Field f(q);
    int n = int(q);  // field size >= receivers
    std::vector<ReceiverKnowledge> rxs;
    rxs.assign(std::size_t(n), ReceiverKnowledge(f));
    PacketId arrived = 0;
    for (int slot = 0; slot < 200; ++slot) {
      if (rng.below(2)) {
        for (auto& rx : rxs) rx.on_arrivals(1);
        ++arrived;
      }
      auto d = next_unseen_combo(rxs, arrived);
      if (d.silent()) continue;
      for (auto& rx : rxs) {
        if (rng.below(2)) continue;  // erased
        auto pre = rx.next_unseen(arrived);
        rx.incorporate(d.combo);
        if (pre) CHECK(rx.is_seen(*pre));
      }
    }
  }
}

TEST_CASE("three-receiver module: fresh system sends the first packet") {
  Field f(3);
  std::vector<ReceiverKnowledge> rxs;
  rxs.assign(3, ReceiverKnowledge(f));
  for (auto& rx : rxs) rx.on_arrivals(1);
  ThreeRxLabels labels;  // L=1, N=2, D=3, m=0
  CHECK(labels.leader == 0);
  CHECK(labels.no_deficit == 1);
  CHECK(labels.deficit == 2);
  CHECK(labels.m == 0);
  auto sets = three_rx_sets(labels, rxs, 1);
  CHECK(sets.next == ThreeRxSets::NextPacket::other);
  auto d = three_rx_combo(labels, sets, rxs, 1);
  CHECK(d.combo == combo({{1, 1}}));
}

TEST_CASE("three-receiver module: pairing decoded-by-N with decoded-by-D") {
  Field f(3);
  // stream p1..p3; L decoded everything; N decoded p2 only; D decoded p1
  // and heard p2 through p2+p3.
  std::vector<ReceiverKnowledge> rxs{
      make_rx(f, 3, {combo({{1, 1}}), combo({{2, 1}}), combo({{3, 1}})}),
      make_rx(f, 3, {combo({{2, 1}})}),
      make_rx(f, 3, {combo({{1, 1}}), combo({{2, 1}, {3, 1}})}),
  };
  auto labels = three_rx_relabel(rxs, 1);
  CHECK(labels.leader == 0);
  CHECK(labels.m == 3);
  CHECK(labels.deficit == 2);  // unsolved set {p2,p3}
  CHECK(labels.no_deficit == 1);

  auto sets = three_rx_sets(labels, rxs, 3);
  CHECK(sets.next == ThreeRxSets::NextPacket::not_arrived);  // p4 not here
  CHECK(sets.s2 == std::vector<PacketId>{2});
  CHECK(sets.s4 == std::vector<PacketId>{1});
  CHECK(sets.s5 == std::vector<PacketId>{3});

  auto d = three_rx_combo(labels, sets, rxs, 3);
  CHECK(d.combo == combo({{1, 1}, {2, 1}}));
  // innovative to both non-leaders
  CHECK_FALSE(rxs[1].knows(d.combo));
  CHECK_FALSE(rxs[2].knows(d.combo));
}

TEST_CASE("three-receiver module: heard pair coefficient avoids known sums") {
  Field f(3);
  for (std::uint32_t known : {1u, 2u}) {
    std::vector<ReceiverKnowledge> rxs{
        make_rx(f, 2, {combo({{1, 1}})}),            // L decoded p1
        make_rx(f, 2, {combo({{2, 1}})}),            // N decoded p2
        make_rx(f, 2, {combo({{2, 1}, {1, known}})}) // D heard both
    };
    auto labels = three_rx_relabel(rxs, 1);
    CHECK(labels.leader == 0);
    CHECK(labels.m == 1);
    CHECK(labels.deficit == 2);
    auto sets = three_rx_sets(labels, rxs, 2);
    CHECK(sets.next == ThreeRxSets::NextPacket::in_s2);  // p2 = p_{m+1}
    CHECK(sets.s5 == std::vector<PacketId>{1});
    auto d = three_rx_combo(labels, sets, rxs, 2);
    REQUIRE(d.combo.terms.size() == 2);
    CHECK_FALSE(rxs[2].knows(d.combo));
    // the coefficient of p1 must differ from the combination D knows
    CHECK(d.combo.terms[0].first == 1);
    CHECK(d.combo.terms[0].second != known);
  }
}

TEST_CASE("three-receiver module: s1 membership mixes in the next packet") {
  Field f(3);
  std::vector<ReceiverKnowledge> rxs{
      make_rx(f, 2, {combo({{1, 1}})}),  // L decoded p1 (prefix)
      make_rx(f, 2, {combo({{2, 1}})}),  // N decoded p2
      make_rx(f, 2, {combo({{2, 1}})}),  // D decoded p2
  };
  auto labels = three_rx_relabel(rxs, 1);
  CHECK(labels.leader == 0);
  CHECK(labels.m == 1);
  auto sets = three_rx_sets(labels, rxs, 2);
  CHECK(sets.next == ThreeRxSets::NextPacket::in_s1);
  CHECK(sets.s6 == std::vector<PacketId>{1});
  auto d = three_rx_combo(labels, sets, rxs, 2);
  CHECK(d.combo == combo({{1, 1}, {2, 1}}));
}

TEST_CASE("relabeling follows rank and unsolved sets") {
  Field f(3);
  // receiver 2 (index 1) alone decodes p1
  std::vector<ReceiverKnowledge> rxs{
      make_rx(f, 1, {}),
      make_rx(f, 1, {combo({{1, 1}})}),
      make_rx(f, 1, {}),
  };
  auto labels = three_rx_relabel(rxs, 1);
  CHECK(labels.leader == 1);
  CHECK(labels.m == 1);
  // neither remaining receiver has an unsolved set: lowest index -> D
  CHECK(labels.deficit == 0);
  CHECK(labels.no_deficit == 2);

  // an unsolved set pins the deficit label
  std::vector<ReceiverKnowledge> rxs2{
      make_rx(f, 2, {combo({{1, 1}}), combo({{2, 1}})}),
      make_rx(f, 2, {combo({{1, 1}, {2, 1}})}),  // heard both, decoded none
      make_rx(f, 2, {combo({{1, 1}}), combo({{2, 1}})}),
  };
  auto labels2 = three_rx_relabel(rxs2, 1);
  CHECK(labels2.leader == 0);
  CHECK(labels2.m == 2);
  CHECK(labels2.deficit == 1);
  CHECK(labels2.no_deficit == 2);
}

TEST_CASE("relabeling aborts when no receiver holds the prefix") {
  Field f(3);
  // rank 1 receivers, but nobody decoded p1
  std::vector<ReceiverKnowledge> rxs{
      make_rx(f, 2, {combo({{1, 1}, {2, 1}})}),
      make_rx(f, 2, {}),
      make_rx(f, 2, {}),
  };
  CHECK_THROWS_AS(three_rx_relabel(rxs, 1), InvariantViolation);
}

TEST_CASE("field too small for the receiver count is a config error") {
  Field f(2);
  std::vector<ReceiverKnowledge> rxs;
  rxs.assign(3, ReceiverKnowledge(f));
  for (auto& rx : rxs) rx.on_arrivals(1);
  CHECK_THROWS_AS(next_unseen_combo(rxs, 1), ConfigError);
}

TEST_CASE("fresh universe puts the only packet in the unheard set") {
  Field f(3);
  std::vector<ReceiverKnowledge> rxs;
  rxs.assign(3, ReceiverKnowledge(f));
  for (auto& rx : rxs) rx.on_arrivals(1);
  ThreeRxLabels labels;
  auto sets = three_rx_sets(labels, rxs, 1);
  CHECK(sets.s6 == std::vector<PacketId>{1});
  CHECK(sets.s2.empty());
  CHECK(sets.s3.empty());
  CHECK(sets.s4.empty());
  CHECK(sets.s5.empty());
}

TEST_CASE("s1 membership with only heard partners mixes from s5") {
  Field f(3);
  std::vector<ReceiverKnowledge> rxs{
      make_rx(f, 3, {combo({{1, 1}}), combo({{2, 1}})}),      // L: p1, p2
      make_rx(f, 3, {combo({{3, 1}})}),                        // N: p3
      make_rx(f, 3, {combo({{3, 1}}), combo({{1, 1}, {2, 1}})}),  // D
  };
  auto labels = three_rx_relabel(rxs, 1);
  CHECK(labels.leader == 0);
  CHECK(labels.m == 2);
  CHECK(labels.deficit == 2);
  auto sets = three_rx_sets(labels, rxs, 3);
  CHECK(sets.next == ThreeRxSets::NextPacket::in_s1);  // p3 decoded by N, D
  CHECK(sets.s5 == std::vector<PacketId>{1, 2});
  CHECK(sets.s2.empty());
  CHECK(sets.s4.empty());
  auto d = three_rx_combo(labels, sets, rxs, 3);
  CHECK(d.combo == combo({{1, 1}, {3, 1}}));  // oldest heard partner + p3
}

TEST_CASE("set partition matches a brute-force rebuild along a trace") {
  // Replay a fixed 12-slot erasure pattern and recompute the partition each
  // slot straight from the decoded/heard-of sets.
  Field f(3);
  std::vector<ReceiverKnowledge> rxs;
  rxs.assign(3, ReceiverKnowledge(f));
  ThreeRxLabels labels;
  PacketId arrived = 0;
  const std::vector<std::uint8_t> arrivals{1, 1, 0, 1, 1, 0, 1, 0, 1, 1, 0, 0};
  const std::vector<std::array<int, 3>> loss{
      {1, 0, 0}, {0, 1, 1}, {1, 1, 0}, {0, 0, 1}, {1, 0, 1}, {0, 1, 0},
      {1, 1, 1}, {0, 0, 0}, {1, 0, 0}, {0, 1, 1}, {1, 0, 1}, {0, 1, 0}};

  for (std::size_t slot = 0; slot < arrivals.size(); ++slot) {
    if (arrivals[slot]) {
      for (auto& rx : rxs) rx.on_arrivals(1);
      ++arrived;
    }
    auto sets = three_rx_sets(labels, rxs, arrived);

    // independent rebuild from the raw per-receiver sets
    const auto& rn = rxs[std::size_t(labels.no_deficit)];
    const auto& rd = rxs[std::size_t(labels.deficit)];
    std::vector<PacketId> s2, s3, s4, s5, s6;
    PacketId hi = std::min<PacketId>(labels.m + 1, arrived);
    for (PacketId x = 1; x <= hi; ++x) {
      bool dn = rn.is_decoded(x);
      bool dd = rd.is_decoded(x);
      bool hd = rd.is_heard(x);
      if (dn && dd) continue;
      if (dn && hd && !dd) s2.push_back(x);
      else if (dn && !hd) s3.push_back(x);
      else if (dd && !dn) s4.push_back(x);
      else if (!dn && hd && !dd) s5.push_back(x);
      else if (!dn && !hd) s6.push_back(x);
    }
    CHECK(sets.s2 == s2);
    CHECK(sets.s3 == s3);
    CHECK(sets.s4 == s4);
    CHECK(sets.s5 == s5);
    CHECK(sets.s6 == s6);

    auto d = three_rx_combo(labels, sets, rxs, arrived);
    if (!d.silent()) {
      for (std::size_t j = 0; j < 3; ++j) {
        if (!loss[slot][j]) rxs[j].incorporate(d.combo);
      }
    }
    labels = three_rx_relabel(rxs, slot + 1);
  }
}
