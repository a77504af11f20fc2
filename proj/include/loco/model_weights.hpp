// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "loco/tensor.hpp"

namespace loco {

// Ordered named tensors plus a preset tag, serialized to the LOCO checkpoint
// format:
//   magic "LOCO", u8 version = 1, u8 preset id, u32 entry count;
//   per entry: u16 name length, UTF-8 name, u8 rank, u32 extent per dim,
//   float32 payload. All integers and floats little-endian.
// save -> load -> save round-trips byte-identically.
struct ModelWeights {
  std::uint8_t preset_id = 0;
  std::vector<std::pair<std::string, Tensor>> entries;

  void add(std::string name, Tensor t) { entries.emplace_back(std::move(name), std::move(t)); }
  const Tensor& get(const std::string& name) const;
  bool has(const std::string& name) const;
};

void save_model_weights(const ModelWeights& weights, const std::filesystem::path& path);
ModelWeights load_model_weights(const std::filesystem::path& path);

std::vector<std::uint8_t> serialize_model_weights(const ModelWeights& weights);
ModelWeights deserialize_model_weights(const std::vector<std::uint8_t>& bytes);

}  // namespace loco
