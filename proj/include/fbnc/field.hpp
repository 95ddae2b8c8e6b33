#pragma once

#include <cstdint>
#include <stdexcept>

namespace fbnc {

bool is_prime(std::uint32_t n);

// Smallest prime >= n (n >= 1).
std::uint32_t next_prime_at_least(std::uint32_t n);

// Prime field GF(q). Symbols are plain uint32_t values in [0, q); the Field
// object carries the modulus and performs the arithmetic.
class Field {
 public:
  explicit Field(std::uint32_t q) : q_(q) {
    if (q_ < 2 || !is_prime(q_))
      throw std::invalid_argument("field modulus must be a prime >= 2");
  }

  std::uint32_t modulus() const { return q_; }

  std::uint32_t add(std::uint32_t a, std::uint32_t b) const {
    std::uint32_t s = a + b;
    return s >= q_ ? s - q_ : s;
  }
  std::uint32_t sub(std::uint32_t a, std::uint32_t b) const {
    return a >= b ? a - b : a + q_ - b;
  }
  std::uint32_t neg(std::uint32_t a) const { return a == 0 ? 0 : q_ - a; }
  std::uint32_t mul(std::uint32_t a, std::uint32_t b) const {
    return static_cast<std::uint32_t>(std::uint64_t(a) * b % q_);
  }
  std::uint32_t pow(std::uint32_t a, std::uint64_t e) const;

  // Multiplicative inverse; a must be nonzero.
  std::uint32_t inv(std::uint32_t a) const {
    if (a == 0) throw std::domain_error("inverse of zero");
    return pow(a, q_ - 2);
  }

  bool operator==(const Field& other) const { return q_ == other.q_; }

 private:
  std::uint32_t q_;
};

// A field symbol that carries its own modulus. Convenient at API boundaries
// and in tests; the linear-algebra internals work with Field + raw values.
struct FieldElement {
  std::uint32_t value = 0;
  std::uint32_t modulus = 2;

  FieldElement() = default;
  FieldElement(std::uint32_t v, std::uint32_t q) : value(v % q), modulus(q) {
    Field check(q);  // validates primality
    (void)check;
  }

  Field field() const { return Field(modulus); }

  friend FieldElement operator+(FieldElement a, FieldElement b) {
    require_same(a, b);
    return raw(a.field().add(a.value, b.value), a.modulus);
  }
  friend FieldElement operator-(FieldElement a, FieldElement b) {
    require_same(a, b);
    return raw(a.field().sub(a.value, b.value), a.modulus);
  }
  friend FieldElement operator*(FieldElement a, FieldElement b) {
    require_same(a, b);
    return raw(a.field().mul(a.value, b.value), a.modulus);
  }
  FieldElement operator-() const { return raw(field().neg(value), modulus); }
  FieldElement inverse() const { return raw(field().inv(value), modulus); }

  bool operator==(const FieldElement& other) const {
    return value == other.value && modulus == other.modulus;
  }

 private:
  static FieldElement raw(std::uint32_t v, std::uint32_t q) {
    FieldElement e;
    e.value = v;
    e.modulus = q;
    return e;
  }
  static void require_same(const FieldElement& a, const FieldElement& b) {
    if (a.modulus != b.modulus)
      throw std::invalid_argument("mixed field moduli");
  }
};

}  // namespace fbnc
