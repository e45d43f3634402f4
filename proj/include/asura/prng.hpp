#pragma once

#include <bit>
#include <cstdint>
#include <string_view>

namespace asura {

// All randomness in the library (placement cascade levels, ring point hashes,
// straw hashes, synthetic id corpora) comes from this one SplitMix64-based
// generator, so the three placement algorithms can be compared on equal
// footing and every run is reproducible bit for bit across platforms.

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// One SplitMix64 step on a state value: additive gamma, then the finalizer.
constexpr std::uint64_t splitmix_round(std::uint64_t state) {
  return mix64(state + kGoldenGamma);
}

struct Seed {
  std::uint64_t value = 0;
};

// Mixes a datum id and a salt into a seed: two rounds over a ^ rotl(b, 32).
// Changing one input bit flips about half the output bits.
constexpr Seed seed_from(std::uint64_t a, std::uint64_t b) {
  return Seed{splitmix_round(splitmix_round(a ^ std::rotl(b, 32)))};
}

class Generator {
 public:
  Generator() = default;
  explicit Generator(Seed seed) : state_(seed.value) {}
  explicit Generator(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_integer() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  // Uniform in [0, 1): top 53 bits of the integer output, scaled by 2^-53.
  double next_uniform() {
    return static_cast<double>(next_integer() >> 11) * 0x1.0p-53;
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_ = 0;
};

// Hash number used by the ring and straw baselines: one further round on the
// seed_from output.
constexpr std::uint64_t hash_value(std::uint64_t a, std::uint64_t b) {
  return splitmix_round(seed_from(a, b).value);
}

// Folds a byte string into a 64-bit datum id so string keys can be placed.
// Definition (fixed, so independent implementations agree): start with
// acc = splitmix_round(key length); consume the key in 8-byte little-endian
// chunks, zero-padding the last one, with acc = seed_from(acc, chunk).
inline std::uint64_t key_to_id(std::string_view key) {
  std::uint64_t acc = splitmix_round(static_cast<std::uint64_t>(key.size()));
  for (std::size_t off = 0; off < key.size(); off += 8) {
    std::uint64_t chunk = 0;
    const std::size_t n = key.size() - off < 8 ? key.size() - off : 8;
    for (std::size_t i = 0; i < n; i++) {
      chunk |= static_cast<std::uint64_t>(static_cast<unsigned char>(key[off + i])) << (8 * i);
    }
    acc = seed_from(acc, chunk).value;
  }
  return acc;
}

}  // namespace asura
