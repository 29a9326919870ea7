#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace latpri {

enum class ErrorKind {
  NotALattice,
  NoBounds,
  CycleInCovers,
  NotDistributive,
  NotJoinIrreducible,
  BoundExceeded,
  BudgetExceeded,
  StageOutOfRange,
  InvariantViolation,
  BadInput,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::NotALattice: return "NotALattice";
    case ErrorKind::NoBounds: return "NoBounds";
    case ErrorKind::CycleInCovers: return "CycleInCovers";
    case ErrorKind::NotDistributive: return "NotDistributive";
    case ErrorKind::NotJoinIrreducible: return "NotJoinIrreducible";
    case ErrorKind::BoundExceeded: return "BoundExceeded";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::StageOutOfRange: return "StageOutOfRange";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::BadInput: return "BadInput";
  }
  return "Unknown";
}

// 64-bit FNV-1a, used for deterministic trace/state digests.
struct Fnv64 {
  std::uint64_t h = 1469598103934665603ULL;
  void feed(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  }
  void feed(const std::string& s) { feed(s.data(), s.size()); }
  void feed_u64(std::uint64_t v) { feed(&v, sizeof v); }
};

// splitmix64: platform-independent seeded RNG for script generation.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // uniform in [0, n)
  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }
};

}  // namespace latpri
