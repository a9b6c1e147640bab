#pragma once

#include <filesystem>
#include <string>

#include "v2x/channel.hpp"

namespace v2x {

inline constexpr char kTraceMagic[4] = {'V', '2', 'X', 'T'};
inline constexpr std::uint32_t kTraceFormatVersion = 1;

// Binary layout (little-endian):
//   "V2XT" | u32 version | i32 B | i32 V | i32 T | i32 N_t | u64 rng_seed
//   | u32 n_cfg | n_cfg x f64 channel config fields
//   | B*V*T*N_t complex64 records ordered (t, b, v, antenna)
void write_trace(const std::filesystem::path& path, const ChannelTrace& trace);
ChannelTrace read_trace(const std::filesystem::path& path);

// Human-readable key=value companion of a trace file.
void write_trace_metadata(const std::filesystem::path& path, const ChannelTrace& trace);

// Lossless debug export: t,b,v,antenna_index,re,im with round-trip float formatting.
void write_trace_csv(const std::filesystem::path& path, const ChannelTrace& trace);

std::vector<double> serialize_channel_config(const ChannelConfig& cfg);
ChannelConfig deserialize_channel_config(const std::vector<double>& fields);

}  // namespace v2x
