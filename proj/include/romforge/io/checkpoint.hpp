// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_IO_CHECKPOINT_HPP
#define ROMFORGE_IO_CHECKPOINT_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "romforge/nn/layers.hpp"
#include "romforge/nn/sequential.hpp"

namespace romforge::io
{

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class DType : std::uint8_t
{
  F32 = 1,
  F64 = 2,
  U8 = 3
};

struct StoredArray
{
  std::string name;
  DType dtype = DType::F32;
  std::vector<std::uint64_t> dims;
  std::vector<std::uint8_t> data;  ///< little-endian payload
};

/// Container layout: magic "ROMFORGE", u32 version, u32 array count, then
/// per array u32 name length, name, u8 dtype, u32 rank, u64 dims, payload;
/// finally u64 trailer length and a UTF-8 JSON trailer.
struct Container
{
  std::vector<StoredArray> arrays;
  nlohmann::json trailer;
};

std::vector<std::uint8_t> encode_container(const Container &c);
Container decode_container(std::span<const std::uint8_t> bytes, const std::string &context);

nlohmann::json layer_spec_to_json(const nn::LayerSpec &spec);
nn::LayerSpec layer_spec_from_json(const nlohmann::json &j);

/// Saves layer specs and every parameter and buffer. `metadata` lands in
/// the trailer under "metadata".
void save_network(const std::filesystem::path &path, nn::Sequential<float> &net,
                  const nlohmann::json &metadata = nlohmann::json::object());

/// Rebuilds the network from its specs and restores its state exactly.
nn::Sequential<float> load_network(const std::filesystem::path &path, nlohmann::json *metadata = nullptr);

}  // namespace romforge::io

#endif  // ROMFORGE_IO_CHECKPOINT_HPP
