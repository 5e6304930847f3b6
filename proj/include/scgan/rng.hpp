#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace scgan {

// Deterministic random source. mt19937_64 is fully specified by the standard;
// the distribution transforms are implemented here rather than with
// std::uniform_real_distribution and friends, whose output is
// implementation-defined. Every consumer derives its own named stream so that
// call-order changes in one place do not shift draws elsewhere.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Independent stream derived from (seed, name, salt).
  static Rng stream(uint64_t seed, std::string_view name, uint64_t salt = 0);

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53 bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard Gaussian via Box-Muller. Consumes exactly two words per call so
  // the stream state stays easy to reason about.
  double normal();

  // Uniform in [0, n). Rejection sampling, no modulo bias.
  uint64_t below(uint64_t n);
  int index(int n) { return static_cast<int>(below(static_cast<uint64_t>(n))); }

  // Fisher-Yates.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::string save_state() const;
  void load_state(const std::string& s);

  bool operator==(const Rng& o) const { return engine_ == o.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace scgan
