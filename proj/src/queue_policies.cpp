#include "fbnc/queue_policies.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace fbnc {

VirtualQueueView virtual_queues(std::uint64_t sender_dim,
                                const std::vector<std::uint64_t>& ranks) {
  VirtualQueueView v;
  v.sizes.reserve(ranks.size());
  for (auto r : ranks) {
    if (r > sender_dim)
      throw std::invalid_argument("receiver rank exceeds sender dimension");
    v.sizes.push_back(sender_dim - r);
  }
  return v;
}

VirtualQueueView virtual_queues(std::uint64_t sender_dim,
                                const std::vector<ReceiverKnowledge>& rxs) {
  std::vector<std::uint64_t> ranks;
  ranks.reserve(rxs.size());
  for (const auto& rx : rxs) ranks.push_back(rx.rank());
  return virtual_queues(sender_dim, ranks);
}

std::pair<PacketId, PacketId> DropWhenDecodedQueue::update(
    const std::vector<bool>& vq_empty) {
  if (vq_empty.size() != mark_.size())
    throw std::invalid_argument("feedback width mismatch");
  for (std::size_t j = 0; j < mark_.size(); ++j) {
    if (vq_empty[j]) mark_[j] = arrived_;
  }
  PacketId drop_to = *std::min_element(mark_.begin(), mark_.end());
  PacketId from = dropped_front_ + 1;
  if (drop_to <= dropped_front_) return {1, 0};  // empty range
  dropped_front_ = drop_to;
  return {from, drop_to};
}

DropWhenSeenQueue::DropWhenSeenQueue(Field f, int receivers) : f_(f) {
  bj_.assign(std::size_t(receivers), RrefBasis(f_, 0));
}

void DropWhenSeenQueue::on_arrivals(std::uint64_t count) {
  for (std::uint64_t i = 0; i < count; ++i) entries_.push_back(++arrived_);
  for (auto& b : bj_) b.append_cols(count);
}

std::vector<std::uint32_t> DropWhenSeenQueue::to_local(const Combo& g) const {
  std::vector<std::uint32_t> v(entries_.size(), 0);
  for (auto [id, coeff] : g.terms) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), id);
    if (it == entries_.end() || *it != id)
      throw std::invalid_argument(
          "transmitted combination uses a packet not in the queue");
    v[std::size_t(it - entries_.begin())] = coeff % f_.modulus();
  }
  return v;
}

std::vector<PacketId> DropWhenSeenQueue::update(
    const std::vector<bool>& received, const Combo& g) {
  if (received.size() != bj_.size())
    throw std::invalid_argument("feedback width mismatch");
  if (!g.empty()) {
    auto local = to_local(g);
    for (std::size_t j = 0; j < bj_.size(); ++j) {
      if (received[j]) bj_[j].insert(local);
    }
  }
  // Columns that are pivots for every receiver correspond to packets all
  // receivers have seen.
  std::vector<std::size_t> common;
  if (!bj_.empty()) {
    common.assign(bj_[0].pivot_cols().begin(), bj_[0].pivot_cols().end());
    for (std::size_t j = 1; j < bj_.size() && !common.empty(); ++j) {
      const auto& p = bj_[j].pivot_cols();
      std::vector<std::size_t> keep;
      std::set_intersection(common.begin(), common.end(), p.begin(), p.end(),
                            std::back_inserter(keep));
      common = std::move(keep);
    }
  }
  std::vector<PacketId> dropped;
  if (!common.empty()) {
    dropped.reserve(common.size());
    for (std::size_t c : common) dropped.push_back(entries_[c]);
    for (auto& b : bj_) b.drop_pivot_cols(common);
    for (auto it = common.rbegin(); it != common.rend(); ++it)
      entries_.erase(entries_.begin() + std::ptrdiff_t(*it));
  }
  return dropped;
}

std::vector<PacketId> DropWhenSeenQueue::seen_by(int j) const {
  std::vector<PacketId> out;
  for (std::size_t c : bj_[std::size_t(j)].pivot_cols())
    out.push_back(entries_[c]);
  return out;
}

DropCommonKnowledgeQueue::DropCommonKnowledgeQueue(Field f, int receivers)
    : f_(f), n_(receivers) {
  bj_.assign(std::size_t(receivers), RrefBasis(f_, 0));
}

void DropCommonKnowledgeQueue::on_arrivals(std::uint64_t count) {
  if (count == 0) return;
  const std::size_t old_cols = std::size_t(arrived_);
  arrived_ += count;
  for (auto& row : rows_global_) row.resize(std::size_t(arrived_), 0);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::vector<std::uint32_t> unit(std::size_t(arrived_), 0);
    unit[old_cols + std::size_t(i)] = 1;
    rows_global_.push_back(std::move(unit));
  }
  for (auto& b : bj_) b.append_cols(count);
}

std::optional<CoeffVector> DropCommonKnowledgeQueue::choose_transmit() const {
  const std::size_t q_size = rows_global_.size();
  if (q_size == 0) return std::nullopt;
  return find_innovative(full_space(f_, q_size), bj_);
}

Combo DropCommonKnowledgeQueue::to_global(const CoeffVector& g_local) const {
  std::vector<std::uint32_t> acc(std::size_t(arrived_), 0);
  for (std::size_t r = 0; r < g_local.size(); ++r) {
    std::uint32_t c = g_local.v[r];
    if (c == 0) continue;
    const auto& row = rows_global_[r];
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i] != 0) acc[i] = f_.add(acc[i], f_.mul(c, row[i]));
    }
  }
  Combo g;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (acc[i] != 0) g.terms.emplace_back(PacketId(i + 1), acc[i]);
  }
  return g;
}

void DropCommonKnowledgeQueue::feedback(const std::vector<bool>& received,
                                        const CoeffVector& g_local) {
  if (received.size() != bj_.size())
    throw std::invalid_argument("feedback width mismatch");
  for (std::size_t j = 0; j < bj_.size(); ++j) {
    if (received[j]) bj_[j].insert(g_local.v);
  }
}

void DropCommonKnowledgeQueue::end_of_slot() {
  const std::size_t q_size = rows_global_.size();
  if (q_size == 0) return;

  RrefBasis common = bj_[0];
  for (std::size_t j = 1; j < bj_.size(); ++j)
    common = intersect(common, bj_[j]);
  if (common.rank() == 0) return;  // nothing shared; queue unchanged

  RrefBasis everything = full_space(f_, q_size);
  auto completion = complete_basis(common, everything);  // B''
  assert(completion.size() == q_size - common.rank());

  // New queue contents: one stored combination per completion vector.
  std::vector<std::vector<std::uint32_t>> new_rows;
  new_rows.reserve(completion.size());
  for (const auto& h : completion) {
    std::vector<std::uint32_t> acc(std::size_t(arrived_), 0);
    for (std::size_t r = 0; r < q_size; ++r) {
      std::uint32_t c = h.v[r];
      if (c == 0) continue;
      const auto& row = rows_global_[r];
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i] != 0) acc[i] = f_.add(acc[i], f_.mul(c, row[i]));
      }
    }
    new_rows.push_back(std::move(acc));
  }

  // Completion vectors are reduced modulo the common-knowledge basis, so
  // each receiver completion lies in span(B''); re-express it there.
  std::vector<RrefBasis> new_bj;
  new_bj.reserve(bj_.size());
  for (auto& b : bj_) {
    auto cj = complete_basis(common, b);  // B_j''
    RrefBasis nb(f_, completion.size());
    for (const auto& c : cj) {
      auto coords = solve_coords(f_, completion, c.v);
      if (!coords)
        throw std::logic_error(
            "constrained completion left the remainder space");
      nb.insert(*coords);
    }
    assert(nb.rank() == b.rank() - common.rank());
    new_bj.push_back(std::move(nb));
  }

  rows_global_ = std::move(new_rows);
  bj_ = std::move(new_bj);
}

bool DropCommonKnowledgeQueue::h_has_full_row_rank() const {
  if (rows_global_.empty()) return true;
  RrefBasis b(f_, std::size_t(arrived_));
  for (const auto& row : rows_global_) {
    if (!b.insert(row).innovative) return false;
  }
  return true;
}

}  // namespace fbnc
