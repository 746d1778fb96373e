#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace cea {

// Derive a child seed from a master seed and a sequence of tags. Streams
// derived with different tag sequences are independent for practical
// purposes, which is what makes per-(arm, imputation, replicate) tasks
// order-independent and safe to run in parallel.
uint64_t derive_seed(uint64_t master, std::initializer_list<uint64_t> tags);
uint64_t derive_seed(uint64_t master, std::string_view label, std::initializer_list<uint64_t> tags = {});

// Deterministic RNG (xoshiro256++) with hand-rolled samplers. The standard
// library distributions are implementation-defined, so every draw the engine
// makes goes through this class to keep outputs bit-reproducible.
class Rng {
public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform();
  // Uniform integer in [0, n).
  uint64_t uniform_int(uint64_t n);

  double normal();                       // standard normal, polar method
  double gamma(double shape);            // shape > 0, unit scale (Marsaglia-Tsang)
  double chi_squared(double df);
  int poisson(double mean);

  // Sample k indices from [0, n) with replacement.
  std::vector<size_t> sample_with_replacement(size_t n, size_t k);

private:
  uint64_t state_[4];
};

}  // namespace cea
