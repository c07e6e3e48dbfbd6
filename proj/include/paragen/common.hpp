#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace paragen {

// Thrown when an operation is called outside its contract
// (shape mismatch, invalid argument, non-scalar loss, ...).
class ContractViolation : public std::runtime_error {
public:
  explicit ContractViolation(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown for malformed files, bad configs and other I/O-level problems.
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Deterministic RNG. Uniform/normal draws are derived from the raw engine
// output so the byte stream does not depend on libstdc++ distribution
// internals; the full state round-trips through a string.
class Rng {
public:
  Rng() : engine_(0) {}
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  // standard normal via Box-Muller (no cached second value, so the
  // engine state alone captures the generator state)
  double normal() {
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  std::string state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void set_state(const std::string& s) {
    std::istringstream is(s);
    is >> engine_;
    if (is.fail()) throw ParseError("invalid rng state string");
  }

private:
  std::mt19937_64 engine_;
};

inline std::uint64_t fnv1a64(const unsigned char* data, std::size_t len,
                             std::uint64_t h = 1469598103934665603ull) {
  for (std::size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace paragen
