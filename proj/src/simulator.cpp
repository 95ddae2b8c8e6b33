#include "fbnc/simulator.hpp"

#include <algorithm>
#include <cassert>

#include "fbnc/coding.hpp"
#include "fbnc/rng.hpp"

namespace fbnc {

const char* to_string(Policy p) {
  switch (p) {
    case Policy::drop_when_decoded: return "alg1";
    case Policy::drop_common_knowledge: return "alg2a";
    case Policy::drop_when_seen: return "alg2b";
  }
  return "?";
}

const char* to_string(Coding c) {
  switch (c) {
    case Coding::random_lc: return "random";
    case Coding::next_unseen: return "next_unseen";
    case Coding::three_rx: return "three_rx";
  }
  return "?";
}

Policy parse_policy(const std::string& s) {
  if (s == "alg1" || s == "drop-when-decoded") return Policy::drop_when_decoded;
  if (s == "alg2a" || s == "drop-common-knowledge")
    return Policy::drop_common_knowledge;
  if (s == "alg2b" || s == "drop-when-seen") return Policy::drop_when_seen;
  throw ConfigError("unknown policy '" + s + "' (expected alg1|alg2a|alg2b)");
}

Coding parse_coding(const std::string& s) {
  if (s == "random") return Coding::random_lc;
  if (s == "next_unseen") return Coding::next_unseen;
  if (s == "three_rx") return Coding::three_rx;
  throw ConfigError("unknown coding '" + s +
                    "' (expected random|next_unseen|three_rx)");
}

std::uint32_t SimConfig::effective_q() const {
  std::uint32_t base = q;
  if (base == 0) {
    switch (coding) {
      case Coding::three_rx: base = 3; break;
      case Coding::next_unseen:
        base = next_prime_at_least(std::uint32_t(receivers));
        break;
      case Coding::random_lc: base = 257; break;
    }
    if (policy == Policy::drop_common_knowledge)
      base = std::max(base, next_prime_at_least(std::uint32_t(receivers) + 1));
  }
  return base;
}

std::uint64_t SimConfig::effective_warmup() const {
  if (warmup) return std::min(*warmup, slots);
  return std::min(std::max<std::uint64_t>(10000, slots / 100), slots);
}

std::vector<std::string> SimConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (receivers < 1) fail("receivers must be >= 1");
  if (slots < 1) fail("slots must be >= 1");
  if (!(lambda >= 0.0 && lambda < 1.0)) fail("lambda must lie in [0, 1)");
  if (!(mu > 0.0 && mu <= 1.0)) fail("mu must lie in (0, 1]");
  const std::uint32_t qe = effective_q();
  if (!is_prime(qe)) fail("q must be prime");
  if (coding == Coding::three_rx) {
    if (receivers != 3) fail("three_rx coding requires receivers = 3");
    if (qe != 3) fail("three_rx coding requires q = 3");
    if (policy == Policy::drop_when_seen)
      fail("three_rx coding pairs with the drop-when-decoded queue: "
           "drop-when-seen could discard packets this module still mixes");
  }
  if (coding == Coding::next_unseen && qe < std::uint32_t(receivers))
    fail("next_unseen coding requires q >= receivers");
  if (policy == Policy::drop_common_knowledge &&
      qe <= std::uint32_t(receivers))
    fail("drop-common-knowledge requires q > receivers");
  std::vector<std::string> warn;
  if (lambda / mu >= 1.0)
    warn.push_back("load factor rho >= 1: queues are unstable");
  return warn;
}

struct Simulator::Source {
  virtual ~Source() = default;
  virtual std::uint32_t arrivals(std::uint64_t slot) = 0;
  virtual bool received(int j, std::uint64_t slot) = 0;
};

namespace {

struct RandomSource final : Simulator::Source {
  Rng arr;
  std::vector<Rng> rx;
  double lambda, mu;

  explicit RandomSource(const SimConfig& c)
      : arr(c.seed, 1), lambda(c.lambda), mu(c.mu) {
    rx.reserve(std::size_t(c.receivers));
    for (int j = 0; j < c.receivers; ++j)
      rx.emplace_back(c.seed, 100 + std::uint64_t(j));
  }
  std::uint32_t arrivals(std::uint64_t) override {
    return arr.bernoulli(lambda) ? 1 : 0;
  }
  bool received(int j, std::uint64_t) override {
    return rx[std::size_t(j)].bernoulli(mu);
  }
};

struct ScriptedSource final : Simulator::Source {
  const std::vector<std::uint8_t>& arr;
  const std::vector<std::vector<std::uint8_t>>& rxs;

  ScriptedSource(const std::vector<std::uint8_t>& a,
                 const std::vector<std::vector<std::uint8_t>>& r)
      : arr(a), rxs(r) {}
  std::uint32_t arrivals(std::uint64_t slot) override {
    return arr[std::size_t(slot - 1)];
  }
  bool received(int j, std::uint64_t slot) override {
    return rxs[std::size_t(j)][std::size_t(slot - 1)] != 0;
  }
};

// dim of the intersection of all receiver knowledge spaces, over the full
// stream. Columns below every delivered front contribute unit vectors to
// each space, so the intersection splits into that prefix plus the
// intersection of the window parts.
std::uint64_t common_knowledge_dim(const std::vector<ReceiverKnowledge>& rxs,
                                   PacketId stream_len) {
  PacketId base = rxs[0].delivered_front();
  for (const auto& rx : rxs)
    base = std::min(base, rx.delivered_front());
  if (base == stream_len) return stream_len;
  RrefBasis common = rxs[0].window_basis(base);
  for (std::size_t j = 1; j < rxs.size(); ++j)
    common = intersect(common, rxs[j].window_basis(base));
  return base + common.rank();
}

}  // namespace

Simulator::Simulator(const SimConfig& cfg) : cfg_(cfg) {
  warnings_ = cfg_.validate();
}

bool Simulator::light_eligible() const {
  return cfg_.policy == Policy::drop_when_decoded &&
         cfg_.coding == Coding::random_lc && !cfg_.verify && !detailed_;
}

RunReport Simulator::run(std::span<TraceSink* const> sinks) {
  RandomSource src(cfg_);
  return light_eligible() ? run_light(src, sinks) : run_impl(src, sinks);
}

RunReport Simulator::run(TraceSink& sink) {
  TraceSink* s = &sink;
  return run(std::span<TraceSink* const>(&s, 1));
}

RunReport Simulator::run_scripted(
    const std::vector<std::uint8_t>& arrivals,
    const std::vector<std::vector<std::uint8_t>>& receptions,
    std::span<TraceSink* const> sinks) {
  if (arrivals.size() < cfg_.slots)
    throw std::invalid_argument("arrival script shorter than the horizon");
  if (receptions.size() != std::size_t(cfg_.receivers))
    throw std::invalid_argument("need one reception script per receiver");
  for (const auto& r : receptions) {
    if (r.size() < cfg_.slots)
      throw std::invalid_argument("reception script shorter than the horizon");
  }
  ScriptedSource src(arrivals, receptions);
  return run_impl(src, sinks);
}

RunReport Simulator::run_scripted(
    const std::vector<std::uint8_t>& arrivals,
    const std::vector<std::vector<std::uint8_t>>& receptions,
    TraceSink& sink) {
  TraceSink* s = &sink;
  return run_scripted(arrivals, receptions, std::span<TraceSink* const>(&s, 1));
}

// Baseline fast path: drop-when-decoded with random coding needs no
// per-symbol state. Receptions are innovative whenever the receiver lags
// the sender (the large-field assumption of the baseline analysis), so
// ranks, virtual queues and the contiguous queue range are everything.
RunReport Simulator::run_light(Source& src, std::span<TraceSink* const> sinks) {
  const int n = cfg_.receivers;
  RunReport rep;
  DropWhenDecodedQueue queue(n);
  std::vector<std::uint64_t> rank(std::size_t(n), 0);
  std::vector<PacketId> front(std::size_t(n), 0);
  std::vector<bool> vq_empty(std::size_t(n), false);

  SlotTrace t;
  t.received.resize(std::size_t(n));
  t.virt_q.resize(std::size_t(n));
  t.decoded_ids.resize(std::size_t(n));
  t.delivered_to.resize(std::size_t(n));

  PacketId arrived = 0;
  for (std::uint64_t slot = 1; slot <= cfg_.slots; ++slot) {
    std::uint32_t a = src.arrivals(slot);
    arrived += a;
    queue.on_arrivals(a);
    rep.arrivals += a;
    t.phys_q_after_arrival = queue.size();

    const bool transmit = queue.size() > 0;
    if (transmit) ++rep.transmissions;
    for (int j = 0; j < n; ++j) {
      bool got = src.received(j, slot);
      t.received[std::size_t(j)] = got;
      t.delivered_to[std::size_t(j)] = 0;
      if (transmit && got && rank[std::size_t(j)] < arrived)
        ++rank[std::size_t(j)];
      bool empty = rank[std::size_t(j)] == arrived;
      vq_empty[std::size_t(j)] = empty;
      if (empty && front[std::size_t(j)] < arrived) {
        front[std::size_t(j)] = arrived;
        t.delivered_to[std::size_t(j)] = arrived;
      }
    }
    queue.update(vq_empty);

    t.slot = slot;
    t.arrivals = a;
    t.stream_len = arrived;
    t.decision = TransmitDecision{};  // coefficients not materialized
    t.phys_q_end = queue.size();
    for (int j = 0; j < n; ++j)
      t.virt_q[std::size_t(j)] = arrived - rank[std::size_t(j)];
    for (TraceSink* s : sinks) s->on_slot(t);
  }
  rep.slots = cfg_.slots;
  return rep;
}

RunReport Simulator::run_impl(Source& src, std::span<TraceSink* const> sinks) {
  const Field f(cfg_.effective_q());
  const int n = cfg_.receivers;
  const bool verify = cfg_.verify;
  const bool guaranteed_innovative =
      cfg_.policy == Policy::drop_common_knowledge ||
      cfg_.coding == Coding::next_unseen || cfg_.coding == Coding::three_rx;

  std::vector<ReceiverKnowledge> rxs;
  rxs.assign(std::size_t(n), ReceiverKnowledge(f));
  std::optional<DropWhenDecodedQueue> q1;
  std::optional<DropWhenSeenQueue> q2b;
  std::optional<DropCommonKnowledgeQueue> q2a;
  switch (cfg_.policy) {
    case Policy::drop_when_decoded: q1.emplace(n); break;
    case Policy::drop_when_seen: q2b.emplace(f, n); break;
    case Policy::drop_common_knowledge: q2a.emplace(f, n); break;
  }

  Rng coding_rng(cfg_.seed, 2);
  ThreeRxLabels labels;
  RunReport rep;

  SlotTrace t;
  t.received.resize(std::size_t(n));
  t.virt_q.resize(std::size_t(n));
  t.decoded_ids.resize(std::size_t(n));
  t.delivered_to.resize(std::size_t(n));
  t.detailed = detailed_;
  if (detailed_) {
    t.seen_sets.resize(std::size_t(n));
    t.decoded_sets.resize(std::size_t(n));
  }

  PacketId arrived = 0;
  PacketId last_drop = 0;
  std::vector<PacketId> queue_ids;
  std::vector<bool> flags(std::size_t(n), false);

  auto queue_size = [&]() -> std::uint64_t {
    if (q1) return q1->size();
    if (q2b) return q2b->size();
    return q2a->size();
  };

  for (std::uint64_t slot = 1; slot <= cfg_.slots; ++slot) {
    std::uint32_t a = src.arrivals(slot);
    if (a > 0) {
      arrived += a;
      rep.arrivals += a;
      for (auto& rx : rxs) rx.on_arrivals(a);
      if (q1) q1->on_arrivals(a);
      if (q2b) q2b->on_arrivals(a);
      if (q2a) q2a->on_arrivals(a);
    }
    const std::uint64_t phys_aa = queue_size();

    if (detailed_) {
      t.queue_after_arrival.clear();
      if (q1) {
        for (PacketId k = q1->first(); k <= q1->last(); ++k)
          t.queue_after_arrival.push_back(k);
      } else if (q2b) {
        t.queue_after_arrival.assign(q2b->entries().begin(),
                                     q2b->entries().end());
      }
    }

    if (q2a && verify) {
      // Exactness point: queue measured after arrivals, receiver spaces
      // before this slot's reception.
      if (!q2a->h_has_full_row_rank()) {
        ++rep.h_rank_violations;
        throw InvariantViolation("stored combinations became dependent",
                                 slot);
      }
      std::uint64_t dim_common = common_knowledge_dim(rxs, arrived);
      if (phys_aa != arrived - dim_common) {
        ++rep.exact_size_violations;
        throw InvariantViolation(
            "queue size != knowledge dim minus common dim", slot);
      }
      std::uint64_t sum_vq = 0;
      for (const auto& rx : rxs) sum_vq += arrived - rx.rank();
      if (phys_aa > sum_vq) {
        ++rep.queue_bound_violations;
        throw InvariantViolation("queue exceeded the virtual-queue sum",
                                 slot);
      }
    }

    // Transmission.
    TransmitDecision dec;
    std::optional<CoeffVector> g_local;
    if (q2a) {
      g_local = q2a->choose_transmit();
      if (g_local) {
        dec.combo = q2a->to_global(*g_local);
        dec.module = CodingModuleTag::subspace_pick;
      }
    } else {
      switch (cfg_.coding) {
        case Coding::random_lc: {
          queue_ids.clear();
          if (q1) {
            for (PacketId k = q1->first(); k <= q1->last(); ++k)
              queue_ids.push_back(k);
          } else {
            queue_ids.assign(q2b->entries().begin(), q2b->entries().end());
          }
          dec = random_combo(queue_ids, f, coding_rng);
          break;
        }
        case Coding::next_unseen:
          dec = next_unseen_combo(rxs, arrived);
          break;
        case Coding::three_rx: {
          auto sets = three_rx_sets(labels, rxs, arrived);
          dec = three_rx_combo(labels, sets, rxs, arrived);
          break;
        }
      }
    }
    if (!dec.silent()) ++rep.transmissions;

    std::uint64_t max_rank_start = 0;
    for (const auto& rx : rxs)
      max_rank_start = std::max(max_rank_start, rx.rank());

    if (verify && cfg_.coding == Coding::three_rx && !q2a) {
      auto unsolved = [&](int i) {
        const auto& rx = rxs[std::size_t(i)];
        return rx.heard_count() > rx.decoded_count();
      };
      if (unsolved(labels.no_deficit) && unsolved(labels.deficit)) {
        ++rep.unsolved_violations;
        throw InvariantViolation("both non-leaders hold unsolved sets", slot);
      }
    }
    if (verify && !dec.silent()) {
      for (int j = 0; j < n; ++j) {
        const auto& rx = rxs[std::size_t(j)];
        if (rx.rank() >= arrived) continue;
        ++rep.innovation_checks;
        if (rx.knows(dec.combo)) {
          ++rep.innovation_violations;
          if (guaranteed_innovative)
            throw InvariantViolation(
                "non-innovative transmission to a deficit receiver", slot);
        }
      }
      if (cfg_.coding == Coding::three_rx && !q2a) {
        if (dec.combo.max_id() > labels.m + 1) {
          ++rep.combo_index_violations;
          throw InvariantViolation("combination reaches beyond m+1", slot);
        }
        for (int j = 0; j < n; ++j) {
          int undecoded = 0;
          for (auto [id, c] : dec.combo.terms)
            if (!rxs[std::size_t(j)].is_decoded(id)) ++undecoded;
          if (undecoded > 2) {
            ++rep.mixing_violations;
            throw InvariantViolation(
                "combination mixes >2 undecoded packets for a receiver",
                slot);
          }
        }
      }
    }

    // Receptions; feedback reaches the sender within the same slot.
    for (int j = 0; j < n; ++j) {
      auto& rx = rxs[std::size_t(j)];
      bool got = src.received(j, slot);
      t.received[std::size_t(j)] = got;
      t.decoded_ids[std::size_t(j)].clear();
      t.delivered_to[std::size_t(j)] = 0;
      if (!got || dec.silent()) continue;

      bool deficit = rx.rank() < arrived;
      std::optional<PacketId> pre_unseen;
      if (verify && cfg_.coding == Coding::next_unseen && !q2a)
        pre_unseen = rx.next_unseen(arrived);
      bool was_leader = rx.rank() == max_rank_start;

      auto ev = rx.incorporate(dec.combo);
      if (!verify && deficit) {
        ++rep.innovation_checks;
        if (!ev.innovative) ++rep.innovation_violations;
      }
      t.decoded_ids[std::size_t(j)] = std::move(ev.decoded);
      t.delivered_to[std::size_t(j)] = ev.delivered_to;

      if (verify) {
        if (pre_unseen && !rx.is_seen(*pre_unseen)) {
          ++rep.seen_order_violations;
          throw InvariantViolation(
              "reception did not reveal the next unseen packet", slot);
        }
        if (cfg_.policy == Policy::drop_when_seen &&
            cfg_.coding == Coding::next_unseen) {
          bool vq_empty_after = rx.rank() == arrived;
          if (decode_event_check(true, vq_empty_after, was_leader) &&
              rx.decoded_count() != rx.rank()) {
            ++rep.decode_event_violations;
            throw InvariantViolation(
                "decoding event left seen packets undecoded", slot);
          }
        }
      }
    }

    // Queue update, just before the end of the slot.
    t.dropped.clear();
    if (q1) {
      for (int j = 0; j < n; ++j)
        flags[std::size_t(j)] = rxs[std::size_t(j)].rank() == arrived;
      q1->update(flags);
    } else if (q2b) {
      for (int j = 0; j < n; ++j)
        flags[std::size_t(j)] = t.received[std::size_t(j)] && !dec.silent();
      t.dropped = q2b->update(flags, dec.combo);
      if (verify) {
        for (PacketId id : t.dropped) {
          for (int j = 0; j < n; ++j) {
            if (!rxs[std::size_t(j)].is_seen(id))
              throw InvariantViolation(
                  "dropped a packet some receiver has not seen", slot);
          }
          if (cfg_.coding == Coding::next_unseen) {
            if (id != last_drop + 1) {
              ++rep.drop_order_violations;
              throw InvariantViolation("drops left index order", slot);
            }
            last_drop = id;
          }
        }
        // The sender-side incremental bases must agree with the receivers'
        // cumulative seen sets over the queue.
        for (int j = 0; j < n; ++j) {
          auto sv = q2b->seen_by(j);
          std::size_t k = 0;
          for (PacketId id : q2b->entries()) {
            bool sender_seen = k < sv.size() && sv[k] == id;
            if (sender_seen) ++k;
            if (sender_seen != rxs[std::size_t(j)].is_seen(id))
              throw InvariantViolation(
                  "incremental and cumulative seen sets disagree", slot);
          }
        }
      }
    } else {
      if (g_local) {
        for (int j = 0; j < n; ++j)
          flags[std::size_t(j)] = t.received[std::size_t(j)];
        q2a->feedback(flags, *g_local);
      }
      q2a->end_of_slot();
    }

    if (cfg_.coding == Coding::three_rx && !q2a)
      labels = three_rx_relabel(rxs, slot);  // throws on a prefix violation

    // End-of-slot measurement.
    t.slot = slot;
    t.arrivals = a;
    t.stream_len = arrived;
    t.decision = std::move(dec);
    t.phys_q_after_arrival = phys_aa;
    t.phys_q_end = queue_size();
    std::uint64_t sum_vq = 0;
    for (int j = 0; j < n; ++j) {
      t.virt_q[std::size_t(j)] = arrived - rxs[std::size_t(j)].rank();
      sum_vq += t.virt_q[std::size_t(j)];
    }
    if (!q1 && t.phys_q_end > sum_vq) {
      ++rep.queue_bound_violations;
      if (verify)
        throw InvariantViolation("queue exceeded the virtual-queue sum", slot);
    }
    if (detailed_) {
      for (int j = 0; j < n; ++j) {
        t.seen_sets[std::size_t(j)] = rxs[std::size_t(j)].seen_packets();
        t.decoded_sets[std::size_t(j)] =
            rxs[std::size_t(j)].decoded_and_heard().first;
      }
    }
    for (TraceSink* s : sinks) s->on_slot(t);
  }
  rep.slots = cfg_.slots;
  return rep;
}

}  // namespace fbnc
