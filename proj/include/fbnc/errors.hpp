#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fbnc {

// Bad run configuration (rejected before the simulation starts).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A per-slot structural assertion failed in verify mode. Indicates a bug:
// the checked properties are proven to hold.
class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(const std::string& what, std::uint64_t slot)
      : std::runtime_error(what + " (slot " + std::to_string(slot) + ")"),
        slot_(slot) {}
  std::uint64_t slot() const { return slot_; }

 private:
  std::uint64_t slot_;
};

}  // namespace fbnc
