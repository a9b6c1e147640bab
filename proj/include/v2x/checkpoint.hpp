#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "v2x/a3c.hpp"

namespace v2x {

// Layout (little-endian):
//   "V2XC" | u32 version | u64 seed | u32 agent count
//   per agent: actor arch, critic arch, u64 actor size, u64 critic size
//   float32 parameters of every agent (actor then critic)
//   u64 FNV-1a hash of all preceding bytes
// An arch is i32 vehicles, history, channels, extra, kernel, filters,
// stride, hidden count, hidden widths..., outputs.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint64_t seed = 0;
  std::vector<ActorCriticParams> agents;  // accumulators are not stored
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ck);
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Throws shape-mismatch unless every agent matches the expected architectures.
void check_compatible(const Checkpoint& ck, int rsus, const NetworkArchitecture& actor,
                      const NetworkArchitecture& critic);

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n);

}  // namespace v2x
