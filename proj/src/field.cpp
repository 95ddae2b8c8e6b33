#include "fbnc/field.hpp"

namespace fbnc {

bool is_prime(std::uint32_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint32_t d = 3; std::uint64_t(d) * d <= n; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

std::uint32_t next_prime_at_least(std::uint32_t n) {
  if (n < 2) return 2;
  std::uint32_t p = n;
  while (!is_prime(p)) ++p;
  return p;
}

std::uint32_t Field::pow(std::uint32_t a, std::uint64_t e) const {
  std::uint32_t base = a % q_;
  std::uint32_t result = 1;
  while (e > 0) {
    if (e & 1) result = mul(result, base);
    base = mul(base, base);
    e >>= 1;
  }
  return result;
}

}  // namespace fbnc
