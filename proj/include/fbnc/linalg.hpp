#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fbnc/field.hpp"

namespace fbnc {

// Coefficient vector over one field. Expresses a coded packet as a linear
// combination of the packets spanning the current coordinate system.
struct CoeffVector {
  Field field;
  std::vector<std::uint32_t> v;

  CoeffVector(Field f, std::vector<std::uint32_t> values)
      : field(f), v(std::move(values)) {
    for (auto& x : v) x %= field.modulus();
  }
  CoeffVector(Field f, std::size_t n) : field(f), v(n, 0) {}

  std::size_t size() const { return v.size(); }
  bool is_zero() const {
    for (auto x : v)
      if (x != 0) return false;
    return true;
  }
  bool operator==(const CoeffVector& other) const {
    return field == other.field && v == other.v;
  }
};

// Basis of a subspace kept in reduced row echelon form: leading entry of
// each row is 1, pivots move strictly right, pivot columns are zero in all
// other rows. Row count always equals rank.
class RrefBasis {
 public:
  RrefBasis(Field f, std::size_t ncols) : field_(f), ncols_(ncols) {}

  const Field& field() const { return field_; }
  std::size_t ncols() const { return ncols_; }
  std::size_t rank() const { return rows_.size(); }
  const std::vector<std::size_t>& pivot_cols() const { return pivots_; }
  std::span<const std::uint32_t> row(std::size_t i) const { return rows_[i]; }
  CoeffVector row_vector(std::size_t i) const {
    return CoeffVector(field_, rows_[i]);
  }

  struct InsertResult {
    bool innovative = false;
    std::size_t pivot_col = 0;
  };

  // Gaussian elimination step: grow the row space by v, preserving RREF.
  // A dependent vector leaves the basis unchanged.
  InsertResult insert(std::span<const std::uint32_t> v);

  // Remainder of v after reduction by the basis rows; zero iff v is in the
  // row space.
  std::vector<std::uint32_t> reduce(std::span<const std::uint32_t> v) const;

  bool contains(std::span<const std::uint32_t> v) const;

  void append_cols(std::size_t extra) {
    ncols_ += extra;
    for (auto& r : rows_) r.resize(ncols_, 0);
  }

  // Remove the given columns (each must currently hold a pivot) together
  // with their pivot rows. Remaining rows have zeros there, so the row
  // space over the surviving columns is preserved. `cols` must be sorted.
  void drop_pivot_cols(const std::vector<std::size_t>& cols);

  bool operator==(const RrefBasis& other) const {
    return field_ == other.field_ && ncols_ == other.ncols_ &&
           rows_ == other.rows_;
  }

 private:
  Field field_;
  std::size_t ncols_;
  std::vector<std::vector<std::uint32_t>> rows_;  // sorted by pivot
  std::vector<std::size_t> pivots_;
};

RrefBasis rref(const Field& f, std::size_t ncols,
               const std::vector<CoeffVector>& rows);
RrefBasis rref(const std::vector<CoeffVector>& rows);  // rows must be nonempty

bool contains(const RrefBasis& basis, const CoeffVector& v);

// Row space of the union (sum) of two subspaces.
RrefBasis span_sum(const RrefBasis& a, const RrefBasis& b);

// Subspace intersection via the Zassenhaus construction: stack [A|A] over
// [B|0], reduce, and read the intersection off the rows whose left half
// vanished.
RrefBasis intersect(const RrefBasis& a, const RrefBasis& b);

bool is_independent(const RrefBasis& a, const RrefBasis& b);

// Vectors extending `inner` to a basis of `outer`. Each returned vector is
// the normalized remainder of an outer row after reduction, so it has zeros
// in every pivot column of `inner`; together with inner's rows the result
// spans `outer`.
std::vector<CoeffVector> complete_basis(const RrefBasis& inner,
                                        const RrefBasis& outer);

// Identity basis of F_q^n.
RrefBasis full_space(const Field& f, std::size_t n);

// A vector in span(sender) outside every receiver subspace that is a strict
// subspace of the sender's. Deterministic: coefficient tuples over the
// sender basis are tried in lexicographic order (capped), falling back to
// the constructive selection that the q > n bound guarantees to succeed.
// Returns nullopt iff the sender space is empty.
std::optional<CoeffVector> find_innovative(
    const RrefBasis& sender, const std::vector<RrefBasis>& receivers);

// Coordinates of target over the given rows, if target lies in their span.
std::optional<std::vector<std::uint32_t>> solve_coords(
    const Field& f, const std::vector<CoeffVector>& rows,
    std::span<const std::uint32_t> target);

}  // namespace fbnc
