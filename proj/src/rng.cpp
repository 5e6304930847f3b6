#include "scgan/rng.hpp"

#include <cmath>
#include <sstream>

#include "scgan/errors.hpp"

namespace scgan {

namespace {

constexpr double kTwoPi = 6.28318530717958647692528676655900577;

uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Rng Rng::stream(uint64_t seed, std::string_view name, uint64_t salt) {
  uint64_t x = mix64(seed);
  x = mix64(x ^ fnv1a(name));
  x = mix64(x ^ salt);
  return Rng(x);
}

double Rng::normal() {
  // u1 in (0, 1] keeps the log finite.
  double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

uint64_t Rng::below(uint64_t n) {
  if (n == 0) throw ContractError("Rng::below: n must be positive");
  const uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

std::string Rng::save_state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void Rng::load_state(const std::string& s) {
  std::istringstream is(s);
  is >> engine_;
  if (is.fail()) throw ParseError("Rng::load_state: malformed engine state");
}

}  // namespace scgan
