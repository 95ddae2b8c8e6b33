#include "fbnc/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

#include "fbnc/errors.hpp"

namespace fbnc {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

// dst -= c * src, starting at `from` (entries before `from` in src are 0).
void axpy_sub(const Field& f, std::vector<std::uint32_t>& dst,
              std::span<const std::uint32_t> src, std::uint32_t c,
              std::size_t from) {
  for (std::size_t i = from; i < src.size(); ++i) {
    if (src[i] != 0) dst[i] = f.sub(dst[i], f.mul(c, src[i]));
  }
}

void scale_from(const Field& f, std::vector<std::uint32_t>& v, std::uint32_t c,
                std::size_t from) {
  if (c == 1) return;
  for (std::size_t i = from; i < v.size(); ++i) {
    if (v[i] != 0) v[i] = f.mul(v[i], c);
  }
}

std::size_t leading_col(const std::vector<std::uint32_t>& v) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] != 0) return i;
  return npos;
}

}  // namespace

RrefBasis::InsertResult RrefBasis::insert(std::span<const std::uint32_t> v) {
  if (v.size() != ncols_)
    throw std::invalid_argument("vector length does not match column count");
  std::vector<std::uint32_t> w(v.begin(), v.end());
  std::size_t lead = npos;
  for (std::size_t col = 0; col < ncols_; ++col) {
    if (w[col] == 0) continue;
    auto it = std::lower_bound(pivots_.begin(), pivots_.end(), col);
    if (it != pivots_.end() && *it == col) {
      std::size_t r = std::size_t(it - pivots_.begin());
      axpy_sub(field_, w, rows_[r], w[col], col);
    } else if (lead == npos) {
      lead = col;
    }
  }
  if (lead == npos) return {false, 0};

  scale_from(field_, w, field_.inv(w[lead]), lead);
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (pivots_[r] < lead && rows_[r][lead] != 0)
      axpy_sub(field_, rows_[r], w, rows_[r][lead], lead);
  }
  auto pos =
      std::size_t(std::lower_bound(pivots_.begin(), pivots_.end(), lead) -
                  pivots_.begin());
  rows_.insert(rows_.begin() + pos, std::move(w));
  pivots_.insert(pivots_.begin() + pos, lead);
  return {true, lead};
}

std::vector<std::uint32_t> RrefBasis::reduce(
    std::span<const std::uint32_t> v) const {
  if (v.size() != ncols_)
    throw std::invalid_argument("vector length does not match column count");
  std::vector<std::uint32_t> w(v.begin(), v.end());
  for (std::size_t col = 0; col < ncols_; ++col) {
    if (w[col] == 0) continue;
    auto it = std::lower_bound(pivots_.begin(), pivots_.end(), col);
    if (it != pivots_.end() && *it == col) {
      std::size_t r = std::size_t(it - pivots_.begin());
      axpy_sub(field_, w, rows_[r], w[col], col);
    }
  }
  return w;
}

bool RrefBasis::contains(std::span<const std::uint32_t> v) const {
  auto rem = reduce(v);
  return leading_col(rem) == npos;
}

void RrefBasis::drop_pivot_cols(const std::vector<std::size_t>& cols) {
  if (cols.empty()) return;
  std::vector<bool> drop_col(ncols_, false);
  std::vector<bool> drop_row(rows_.size(), false);
  for (std::size_t c : cols) {
    if (c >= ncols_) throw std::invalid_argument("column out of range");
    auto it = std::lower_bound(pivots_.begin(), pivots_.end(), c);
    if (it == pivots_.end() || *it != c)
      throw std::invalid_argument("dropped column is not a pivot column");
    drop_col[c] = true;
    drop_row[std::size_t(it - pivots_.begin())] = true;
  }
  std::vector<std::vector<std::uint32_t>> new_rows;
  new_rows.reserve(rows_.size() - cols.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (drop_row[r]) continue;
    std::vector<std::uint32_t> row;
    row.reserve(ncols_ - cols.size());
    for (std::size_t c = 0; c < ncols_; ++c)
      if (!drop_col[c]) row.push_back(rows_[r][c]);
    new_rows.push_back(std::move(row));
  }
  ncols_ -= cols.size();
  rows_ = std::move(new_rows);
  pivots_.clear();
  for (const auto& row : rows_) pivots_.push_back(leading_col(row));
}

RrefBasis rref(const Field& f, std::size_t ncols,
               const std::vector<CoeffVector>& rows) {
  RrefBasis b(f, ncols);
  for (const auto& r : rows) {
    if (!(r.field == f)) throw std::invalid_argument("mixed field moduli");
    b.insert(r.v);
  }
  return b;
}

RrefBasis rref(const std::vector<CoeffVector>& rows) {
  if (rows.empty())
    throw std::invalid_argument("cannot deduce shape from empty row list");
  return rref(rows.front().field, rows.front().size(), rows);
}

bool contains(const RrefBasis& basis, const CoeffVector& v) {
  if (!(v.field == basis.field()))
    throw std::invalid_argument("mixed field moduli");
  return basis.contains(v.v);
}

RrefBasis span_sum(const RrefBasis& a, const RrefBasis& b) {
  if (a.ncols() != b.ncols() || !(a.field() == b.field()))
    throw std::invalid_argument("shape mismatch");
  RrefBasis out = a;
  for (std::size_t i = 0; i < b.rank(); ++i) out.insert(b.row(i));
  return out;
}

RrefBasis intersect(const RrefBasis& a, const RrefBasis& b) {
  if (a.ncols() != b.ncols() || !(a.field() == b.field()))
    throw std::invalid_argument("shape mismatch");
  const Field& f = a.field();
  const std::size_t n = a.ncols();
  RrefBasis stacked(f, 2 * n);
  std::vector<std::uint32_t> w(2 * n, 0);
  for (std::size_t i = 0; i < a.rank(); ++i) {
    auto row = a.row(i);
    std::copy(row.begin(), row.end(), w.begin());
    std::copy(row.begin(), row.end(), w.begin() + std::ptrdiff_t(n));
    stacked.insert(w);
  }
  std::fill(w.begin() + std::ptrdiff_t(n), w.end(), 0);
  for (std::size_t i = 0; i < b.rank(); ++i) {
    auto row = b.row(i);
    std::copy(row.begin(), row.end(), w.begin());
    stacked.insert(w);
  }
  // Rows whose pivot landed in the right half have a vanished left half;
  // their right halves span the intersection.
  RrefBasis out(f, n);
  for (std::size_t i = 0; i < stacked.rank(); ++i) {
    if (stacked.pivot_cols()[i] >= n) {
      auto row = stacked.row(i);
      out.insert(row.subspan(n));
    }
  }
  return out;
}

bool is_independent(const RrefBasis& a, const RrefBasis& b) {
  return span_sum(a, b).rank() == a.rank() + b.rank();
}

std::vector<CoeffVector> complete_basis(const RrefBasis& inner,
                                        const RrefBasis& outer) {
  if (inner.ncols() != outer.ncols() || !(inner.field() == outer.field()))
    throw std::invalid_argument("shape mismatch");
  for (std::size_t i = 0; i < inner.rank(); ++i) {
    if (!outer.contains(inner.row(i)))
      throw std::invalid_argument("inner subspace not contained in outer");
  }
  const Field& f = inner.field();
  RrefBasis acc = inner;
  std::vector<CoeffVector> out;
  for (std::size_t i = 0; i < outer.rank(); ++i) {
    auto rem = acc.reduce(outer.row(i));
    std::size_t lead = leading_col(rem);
    if (lead == npos) continue;
    scale_from(f, rem, f.inv(rem[lead]), lead);
    acc.insert(rem);
    out.emplace_back(f, std::move(rem));
  }
  assert(acc.rank() == outer.rank());
  return out;
}

RrefBasis full_space(const Field& f, std::size_t n) {
  RrefBasis b(f, n);
  std::vector<std::uint32_t> e(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = 1;
    b.insert(e);
    e[i] = 0;
  }
  return b;
}

namespace {

bool valid_for_all(const CoeffVector& v,
                   const std::vector<const RrefBasis*>& strict) {
  for (const auto* r : strict)
    if (r->contains(v.v)) return false;
  return true;
}

CoeffVector combine_rows(const Field& f, const RrefBasis& sender,
                         const std::vector<std::uint32_t>& coeffs) {
  CoeffVector v(f, sender.ncols());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] == 0) continue;
    auto row = sender.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c] != 0) v.v[c] = f.add(v.v[c], f.mul(coeffs[i], row[c]));
    }
  }
  return v;
}

}  // namespace

std::optional<CoeffVector> find_innovative(
    const RrefBasis& sender, const std::vector<RrefBasis>& receivers) {
  const Field& f = sender.field();
  if (f.modulus() <= receivers.size())
    throw ConfigError("innovative selection requires field size > number of "
                      "receiver subspaces");
  const std::size_t k = sender.rank();
  if (k == 0) return std::nullopt;

  std::vector<const RrefBasis*> strict;
  for (const auto& r : receivers) {
    if (r.rank() < k) strict.push_back(&r);
  }
  if (strict.empty()) return combine_rows(f, sender, {1});

  // Lexicographic scan over coefficient tuples, first digit most
  // significant, starting at (0,...,0,1). Capped: adversarial receiver
  // subspaces could make the scan visit exponentially many tuples, so after
  // the cap we switch to the constructive selection, which stays
  // deterministic.
  const std::uint32_t q = f.modulus();
  std::vector<std::uint32_t> digits(k, 0);
  const int cap = 64;
  for (int tries = 0; tries < cap; ++tries) {
    std::size_t i = k;
    while (i > 0) {
      --i;
      if (digits[i] + 1 < q) {
        ++digits[i];
        break;
      }
      digits[i] = 0;
      if (i == 0) {  // wrapped: every tuple visited
        i = npos;
        break;
      }
    }
    if (i == npos) break;
    CoeffVector v = combine_rows(f, sender, digits);
    if (valid_for_all(v, strict)) return v;
  }

  CoeffVector v(f, sender.ncols());
  v.v.assign(sender.row(0).begin(), sender.row(0).end());
  std::vector<const RrefBasis*> done;
  for (const auto* rcv : strict) {
    if (!rcv->contains(v.v)) {
      done.push_back(rcv);
      continue;
    }
    std::size_t wi = 0;
    while (wi < k && rcv->contains(sender.row(wi))) ++wi;
    assert(wi < k);  // strict subspace misses some sender row
    auto w = sender.row(wi);
    bool fixed = false;
    for (std::uint32_t alpha = 1; alpha < q && !fixed; ++alpha) {
      CoeffVector cand = v;
      for (std::size_t c = 0; c < w.size(); ++c) {
        if (w[c] != 0) cand.v[c] = f.add(cand.v[c], f.mul(alpha, w[c]));
      }
      if (rcv->contains(cand.v)) continue;
      bool ok = true;
      for (const auto* d : done) {
        if (d->contains(cand.v)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        v = std::move(cand);
        fixed = true;
      }
    }
    if (!fixed)  // impossible when q > number of subspaces
      throw std::logic_error("innovative selection exhausted its choices");
    done.push_back(rcv);
  }
  if (!valid_for_all(v, strict))
    throw std::logic_error("innovative selection produced a known vector");
  return v;
}

std::optional<std::vector<std::uint32_t>> solve_coords(
    const Field& f, const std::vector<CoeffVector>& rows,
    std::span<const std::uint32_t> target) {
  const std::size_t m = rows.size();
  const std::size_t n = target.size();
  // Augmented RREF: track how each echelon row combines the originals. Rows
  // are kept fully reduced so a single pass suffices when reducing a vector.
  std::vector<std::vector<std::uint32_t>> evec;
  std::vector<std::vector<std::uint32_t>> ecoef;
  std::vector<std::size_t> epiv;
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i].size() != n) throw std::invalid_argument("shape mismatch");
    std::vector<std::uint32_t> w = rows[i].v;
    std::vector<std::uint32_t> c(m, 0);
    c[i] = 1;
    for (std::size_t r = 0; r < evec.size(); ++r) {
      std::uint32_t factor = w[epiv[r]];
      if (factor == 0) continue;
      axpy_sub(f, w, evec[r], factor, 0);
      axpy_sub(f, c, ecoef[r], factor, 0);
    }
    std::size_t lead = leading_col(w);
    if (lead == npos) continue;
    std::uint32_t invl = f.inv(w[lead]);
    scale_from(f, w, invl, 0);
    scale_from(f, c, invl, 0);
    for (std::size_t r = 0; r < evec.size(); ++r) {
      std::uint32_t factor = evec[r][lead];
      if (factor == 0) continue;
      axpy_sub(f, evec[r], w, factor, 0);
      axpy_sub(f, ecoef[r], c, factor, 0);
    }
    evec.push_back(std::move(w));
    ecoef.push_back(std::move(c));
    epiv.push_back(lead);
  }
  std::vector<std::uint32_t> t(target.begin(), target.end());
  std::vector<std::uint32_t> acc(m, 0);
  for (std::size_t r = 0; r < evec.size(); ++r) {
    std::uint32_t factor = t[epiv[r]];
    if (factor == 0) continue;
    axpy_sub(f, t, evec[r], factor, 0);
    for (std::size_t j = 0; j < m; ++j)
      acc[j] = f.add(acc[j], f.mul(factor, ecoef[r][j]));
  }
  if (leading_col(t) != npos) return std::nullopt;
  return acc;
}

}  // namespace fbnc
