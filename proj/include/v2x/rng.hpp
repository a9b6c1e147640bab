#pragma once

#include <cstdint>
#include <random>

namespace v2x {

using Rng = std::mt19937_64;

// Named substreams of a master seed. Each experiment factor draws from its own
// stream so that sweeping one factor leaves the others' draws untouched.
enum class Stream : std::uint64_t {
  kChannel = 1,
  kMobility = 2,
  kNetworkInit = 3,
  kActionSampling = 4,
  kEpisodeStart = 5,
  kBootstrap = 6,
  kWorker = 16,  // workers use kWorker + worker id
};

// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based split: seed of substream `index` under `parent`.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  return splitmix64(splitmix64(parent) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t master, Stream s, std::uint64_t sub = 0) {
  return derive_seed(derive_seed(master, static_cast<std::uint64_t>(s)), sub);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace v2x
