#pragma once

#include <filesystem>
#include <string>

#include "cpinn/network.hpp"

namespace cpinn {

// Model checkpoint layout, version 1. All integers are little-endian uint32,
// all reals little-endian IEEE-754 binary64.
//
//   magic        8 bytes  "CPINNMDL"
//   version      u32      1
//   input_dim    u32
//   n_outer      u32
//   n_inner      u32
//   n_outer x network
//   n_inner x { component u32, kind u32 (0: p=x-origin, 1: p=1-x),
//               axis u32, origin f64, delta f64, network }
//
//   network:  n_sizes u32, n_sizes x u32 layer sizes, then for every layer
//             the weight matrix (row-major, out x in) followed by the bias.

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_model(const CompositeModel& model);
/// Throws IoError on a malformed or truncated buffer.
CompositeModel deserialize_model(const std::string& bytes);

void save_checkpoint(const CompositeModel& model, const std::filesystem::path& path);
CompositeModel load_checkpoint(const std::filesystem::path& path);

} // namespace cpinn
