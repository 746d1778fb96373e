#include "util/rng.hpp"

#include <cmath>

#include "util/error.hpp"

namespace cea {

namespace {

uint64_t splitmix64(uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t mix(uint64_t h, uint64_t v) {
  // 64-bit FNV-1a over the eight bytes of v, seeded with h.
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffULL;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

uint64_t derive_seed(uint64_t master, std::initializer_list<uint64_t> tags) {
  uint64_t h = mix(kFnvOffset, master);
  for (uint64_t t : tags) h = mix(h, t);
  // A final splitmix pass spreads low-entropy tag patterns across all bits.
  return splitmix64(h);
}

uint64_t derive_seed(uint64_t master, std::string_view label, std::initializer_list<uint64_t> tags) {
  uint64_t h = mix(kFnvOffset, master);
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  for (uint64_t t : tags) h = mix(h, t);
  return splitmix64(h);
}

Rng::Rng(uint64_t seed) {
  uint64_t s = seed;
  for (auto& w : state_) w = splitmix64(s);
}

uint64_t Rng::next_u64() {
  const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t Rng::uniform_int(uint64_t n) {
  if (n == 0) throw internal_error("uniform_int: n must be positive");
  // Rejection sampling to avoid modulo bias.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % n;
}

double Rng::normal() {
  // Polar (Marsaglia) method without caching the spare draw: discarding it
  // keeps each call's consumption pattern simple and self-contained.
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw internal_error("gamma: shape must be positive");
  if (shape < 1.0) {
    // Boost the shape and correct with a power of a uniform.
    const double g = gamma(shape + 1.0);
    const double u = uniform();
    return g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::chi_squared(double df) { return 2.0 * gamma(0.5 * df); }

int Rng::poisson(double mean) {
  if (mean < 0.0) throw internal_error("poisson: mean must be nonnegative");
  if (mean == 0.0) return 0;
  if (mean > 30.0) {
    // Split recursively; exact distribution, no approximation.
    const int a = poisson(mean / 2.0);
    const int b = poisson(mean / 2.0);
    return a + b;
  }
  // Knuth multiplication method.
  const double limit = std::exp(-mean);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform();
  } while (p > limit);
  return k - 1;
}

std::vector<size_t> Rng::sample_with_replacement(size_t n, size_t k) {
  std::vector<size_t> out(k);
  for (size_t i = 0; i < k; ++i) out[i] = static_cast<size_t>(uniform_int(n));
  return out;
}

}  // namespace cea
