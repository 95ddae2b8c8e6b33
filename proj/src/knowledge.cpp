#include "fbnc/knowledge.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fbnc {

namespace {
constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
}

void ReceiverKnowledge::on_arrivals(std::uint64_t count) {
  if (count == 0) return;
  stream_len_ += count;
  const std::size_t w = width();
  for (auto& row : rows_) row.resize(w, 0);
  pivot_row_of_col_.resize(w, kNoRow);
  decoded_col_.resize(w, 0);
  heard_col_.resize(w, 0);
}

ReceiverKnowledge::Events ReceiverKnowledge::incorporate(const Combo& combo) {
  Events ev;
  const std::size_t w = width();
  scratch_.assign(w, 0);
  std::size_t first_nz = npos;
  for (auto [id, coeff] : combo.terms) {
    if (id == 0 || id > stream_len_)
      throw std::invalid_argument("combination involves an unarrived packet");
    if (coeff % f_.modulus() == 0) continue;
    if (id <= front_) continue;  // decoded prefix reduces away immediately
    std::size_t col = col_of(id);
    scratch_[col] = coeff % f_.modulus();
    if (!heard_col_[col]) {
      heard_col_[col] = 1;
      ++heard_count_;
    }
    first_nz = std::min(first_nz, col);
  }

  std::size_t lead = npos;
  if (first_nz != npos) {
    for (std::size_t col = first_nz; col < w; ++col) {
      std::uint32_t c = scratch_[col];
      if (c == 0) continue;
      std::int32_t r = pivot_row_of_col_[col];
      if (r >= 0) {
        const auto& row = rows_[std::size_t(r)];
        for (std::size_t i = col; i < w; ++i) {
          if (row[i] != 0) scratch_[i] = f_.sub(scratch_[i], f_.mul(c, row[i]));
        }
      } else if (lead == npos) {
        lead = col;
      }
    }
  }
  if (lead == npos) return ev;  // dependent: rank unchanged
  ev.innovative = true;

  std::uint32_t invl = f_.inv(scratch_[lead]);
  if (invl != 1) {
    for (std::size_t i = lead; i < w; ++i)
      if (scratch_[i] != 0) scratch_[i] = f_.mul(scratch_[i], invl);
  }

  auto pos = std::size_t(
      std::lower_bound(row_pivot_.begin(), row_pivot_.end(), lead) -
      row_pivot_.begin());
  std::vector<std::size_t> changed;
  for (std::size_t r = 0; r < pos; ++r) {
    std::uint32_t c = rows_[r][lead];
    if (c == 0) continue;
    auto& row = rows_[r];
    for (std::size_t i = lead; i < w; ++i) {
      if (scratch_[i] != 0) row[i] = f_.sub(row[i], f_.mul(c, scratch_[i]));
    }
    changed.push_back(r);
  }
  rows_.insert(rows_.begin() + std::ptrdiff_t(pos),
               std::vector<std::uint32_t>(scratch_.begin(), scratch_.end()));
  row_pivot_.insert(row_pivot_.begin() + std::ptrdiff_t(pos), lead);
  refresh_pivot_map(pos);
  changed.push_back(pos);

  for (std::size_t r : changed) {
    std::size_t col = row_pivot_[r];
    if (decoded_col_[col]) continue;
    const auto& row = rows_[r];
    bool singleton = true;
    for (std::size_t i = col + 1; i < w; ++i) {
      if (row[i] != 0) {
        singleton = false;
        break;
      }
    }
    if (singleton) {
      decoded_col_[col] = 1;
      ++decoded_count_;
      ev.decoded.push_back(id_of(col));
    }
  }
  std::sort(ev.decoded.begin(), ev.decoded.end());

  while (min_unseen_ <= stream_len_ && is_seen(min_unseen_)) ++min_unseen_;

  std::size_t retire = 0;
  while (front_ < stream_len_ && decoded_col_[col_of(front_ + 1)]) {
    ++front_;
    ++retire;
  }
  if (retire > 0) {
    assert(retire <= rows_.size());
    for (std::size_t r = 0; r < retire; ++r)
      pivot_row_of_col_[row_pivot_[r]] = kNoRow;
    rows_.erase(rows_.begin(), rows_.begin() + std::ptrdiff_t(retire));
    row_pivot_.erase(row_pivot_.begin(),
                     row_pivot_.begin() + std::ptrdiff_t(retire));
    refresh_pivot_map(0);
    ev.delivered_to = front_;
    compact();
  }
  return ev;
}

void ReceiverKnowledge::refresh_pivot_map(std::size_t from_row) {
  for (std::size_t r = from_row; r < rows_.size(); ++r)
    pivot_row_of_col_[row_pivot_[r]] = std::int32_t(r);
}

void ReceiverKnowledge::compact() {
  const std::size_t base = std::size_t(front_ - origin_);
  if (base < 64 || 2 * base < width()) return;
  for (auto& row : rows_)
    row.erase(row.begin(), row.begin() + std::ptrdiff_t(base));
  pivot_row_of_col_.erase(pivot_row_of_col_.begin(),
                          pivot_row_of_col_.begin() + std::ptrdiff_t(base));
  decoded_col_.erase(decoded_col_.begin(),
                     decoded_col_.begin() + std::ptrdiff_t(base));
  heard_col_.erase(heard_col_.begin(),
                   heard_col_.begin() + std::ptrdiff_t(base));
  for (auto& p : row_pivot_) p -= base;
  origin_ = front_;
}

bool ReceiverKnowledge::is_seen(PacketId k) const {
  if (k == 0) throw std::invalid_argument("packet ids are 1-based");
  if (k <= front_) return true;
  if (k > stream_len_) return false;
  return pivot_row_of_col_[col_of(k)] != kNoRow;
}

bool ReceiverKnowledge::is_decoded(PacketId k) const {
  if (k == 0) throw std::invalid_argument("packet ids are 1-based");
  if (k <= front_) return true;
  if (k > stream_len_) return false;
  return decoded_col_[col_of(k)] != 0;
}

bool ReceiverKnowledge::is_heard(PacketId k) const {
  if (k == 0) throw std::invalid_argument("packet ids are 1-based");
  if (k <= front_) return true;
  if (k > stream_len_) return false;
  return heard_col_[col_of(k)] != 0;
}

std::optional<PacketId> ReceiverKnowledge::next_unseen(
    PacketId stream_len) const {
  if (min_unseen_ <= stream_len) return min_unseen_;
  return std::nullopt;
}

Combo ReceiverKnowledge::witness(PacketId k) const {
  if (!is_seen(k)) throw std::invalid_argument("witness of an unseen packet");
  if (k <= front_) return Combo::single(k);
  Combo c;
  const auto& row = rows_[std::size_t(pivot_row_of_col_[col_of(k)])];
  for (std::size_t i = col_of(k); i < row.size(); ++i) {
    if (row[i] != 0) c.terms.emplace_back(id_of(i), row[i]);
  }
  return c;
}

std::uint32_t ReceiverKnowledge::witness_coeff(PacketId k, PacketId at) const {
  if (!is_seen(k)) throw std::invalid_argument("witness of an unseen packet");
  if (k <= front_) return at == k ? 1 : 0;
  if (at <= front_ || at > stream_len_) return at == k ? 1 : 0;
  return rows_[std::size_t(pivot_row_of_col_[col_of(k)])][col_of(at)];
}

bool ReceiverKnowledge::knows(const Combo& combo) const {
  const std::size_t w = width();
  std::vector<std::uint32_t> v(w, 0);
  std::size_t first_nz = npos;
  for (auto [id, coeff] : combo.terms) {
    if (id == 0 || id > stream_len_)
      throw std::invalid_argument("combination involves an unarrived packet");
    if (coeff % f_.modulus() == 0) continue;
    if (id <= front_) continue;
    std::size_t col = col_of(id);
    v[col] = coeff % f_.modulus();
    first_nz = std::min(first_nz, col);
  }
  if (first_nz == npos) return true;
  for (std::size_t col = first_nz; col < w; ++col) {
    std::uint32_t c = v[col];
    if (c == 0) continue;
    std::int32_t r = pivot_row_of_col_[col];
    if (r < 0) return false;
    const auto& row = rows_[std::size_t(r)];
    for (std::size_t i = col; i < w; ++i) {
      if (row[i] != 0) v[i] = f_.sub(v[i], f_.mul(c, row[i]));
    }
  }
  return true;
}

std::vector<PacketId> ReceiverKnowledge::seen_packets() const {
  std::vector<PacketId> out;
  out.reserve(rank());
  for (PacketId k = 1; k <= front_; ++k) out.push_back(k);
  for (std::size_t p : row_pivot_) out.push_back(id_of(p));
  return out;
}

std::pair<std::vector<PacketId>, std::vector<PacketId>>
ReceiverKnowledge::decoded_and_heard() const {
  std::vector<PacketId> decoded;
  std::vector<PacketId> heard;
  for (PacketId k = 1; k <= stream_len_; ++k) {
    if (is_decoded(k)) decoded.push_back(k);
    if (is_heard(k)) heard.push_back(k);
  }
  return {std::move(decoded), std::move(heard)};
}

ReceiverKnowledge::EquivalencePartition
ReceiverKnowledge::equivalence_classes() const {
  if (f_.modulus() != 3)
    throw std::invalid_argument(
        "equivalence classes are defined for the GF(3) module");
  EquivalencePartition part;
  std::vector<PacketId> open;  // heard but not decoded
  for (PacketId k = 1; k <= stream_len_; ++k) {
    if (is_decoded(k))
      part.zero_class.push_back(k);
    else if (is_heard(k))
      open.push_back(k);
    else
      part.singletons.push_back(k);
  }
  // Union-find over the undecoded heard packets; x ~ y when x + y or
  // x + 2y is known.
  std::vector<std::size_t> parent(open.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < open.size(); ++i) {
    for (std::size_t j = i + 1; j < open.size(); ++j) {
      Combo c1;
      c1.terms = {{open[i], 1}, {open[j], 1}};
      Combo c2;
      c2.terms = {{open[i], 1}, {open[j], 2}};
      if (knows(c1) || knows(c2)) parent[find(i)] = find(j);
    }
  }
  std::vector<std::vector<PacketId>> classes(open.size());
  for (std::size_t i = 0; i < open.size(); ++i)
    classes[find(i)].push_back(open[i]);
  for (auto& cls : classes) {
    if (!cls.empty()) part.mixed_classes.push_back(std::move(cls));
  }
  return part;
}

RrefBasis ReceiverKnowledge::full_basis() const { return window_basis(0); }

RrefBasis ReceiverKnowledge::window_basis(PacketId base) const {
  if (base > front_)
    throw std::invalid_argument("window base must not exceed the front");
  const std::size_t n = std::size_t(stream_len_ - base);
  RrefBasis b(f_, n);
  std::vector<std::uint32_t> row(n, 0);
  for (PacketId k = base + 1; k <= front_; ++k) {
    row[std::size_t(k - base - 1)] = 1;
    b.insert(row);
    row[std::size_t(k - base - 1)] = 0;
  }
  for (const auto& src : rows_) {
    std::fill(row.begin(), row.end(), 0);
    for (std::size_t c = 0; c < src.size(); ++c) {
      if (src[c] != 0) row[std::size_t(id_of(c) - base - 1)] = src[c];
    }
    b.insert(row);
  }
  return b;
}

}  // namespace fbnc
