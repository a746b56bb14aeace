#pragma once

#include "gsn/model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace gsn {

/// Binary checkpoint layout, all integers and reals little-endian:
///
///   magic    8 bytes  "GSNCKPT\0"
///   version  u32      1
///   config   u64 visible_size, u64 depth, u64 hidden_sizes[depth],
///            f64 eta_in, f64 eta_out, f64 input_corruption_p,
///            u64 walkback_steps, u8 visible_kind (0 binary, 1 real),
///            u8 corrupt_every_step, u8 persist_h0, u64 seed
///   params   u64 count, then per owned parameter in declaration order:
///            u32 name length, name bytes, u64 rows, u64 cols,
///            f64 values in row-major order
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize(const GsnModel& model);
GsnModel deserialize(std::string_view bytes);

void save_checkpoint(const GsnModel& model, const std::filesystem::path& path);
GsnModel load_checkpoint(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
/// fnv1a64 of the serialized checkpoint.
std::uint64_t checksum(const GsnModel& model);
std::string hex64(std::uint64_t value);

}  // namespace gsn
