// Copyright (C) 2026 The LoCO Authors
// SPDX-License-Identifier: Apache-2.0
#include "loco/model_weights.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace loco {

namespace {

constexpr char kMagic[4] = {'L', 'O', 'C', 'O'};
constexpr std::uint8_t kVersion = 1;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f32(std::vector<std::uint8_t>& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

struct Reader {
  const std::vector<std::uint8_t>& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw std::runtime_error("model weights: truncated file");
  }
  std::uint8_t u8() {
    need(1);
    return buf[pos++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(buf[pos] | (buf[pos + 1] << 8));
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  float f32() {
    const std::uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
  }
};

}  // namespace

const Tensor& ModelWeights::get(const std::string& name) const {
  for (const auto& [n, t] : entries) {
    if (n == name) return t;
  }
  throw std::runtime_error("model weights: missing entry '" + name + "'");
}

bool ModelWeights::has(const std::string& name) const {
  for (const auto& [n, t] : entries) {
    if (n == name) return true;
  }
  return false;
}

std::vector<std::uint8_t> serialize_model_weights(const ModelWeights& weights) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kVersion);
  out.push_back(weights.preset_id);
  put_u32(out, static_cast<std::uint32_t>(weights.entries.size()));
  for (const auto& [name, tensor] : weights.entries) {
    if (name.size() > 0xffff) throw std::invalid_argument("model weights: name too long");
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    out.push_back(static_cast<std::uint8_t>(tensor.rank()));
    for (int e : tensor.shape) put_u32(out, static_cast<std::uint32_t>(e));
    for (float f : tensor.data) put_f32(out, f);
  }
  return out;
}

ModelWeights deserialize_model_weights(const std::vector<std::uint8_t>& bytes) {
  Reader r{bytes};
  r.need(4);
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw std::runtime_error("model weights: bad magic");
  }
  r.pos = 4;
  const std::uint8_t version = r.u8();
  if (version != kVersion) {
    throw std::runtime_error("model weights: unsupported version " + std::to_string(version));
  }
  ModelWeights w;
  w.preset_id = r.u8();
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t name_len = r.u16();
    r.need(name_len);
    std::string name(reinterpret_cast<const char*>(bytes.data() + r.pos), name_len);
    r.pos += name_len;
    const std::uint8_t rank = r.u8();
    std::vector<int> shape;
    for (int d = 0; d < rank; ++d) shape.push_back(static_cast<int>(r.u32()));
    Tensor t(shape);
    for (auto& f : t.data) f = r.f32();
    w.add(std::move(name), std::move(t));
  }
  if (r.pos != bytes.size()) throw std::runtime_error("model weights: trailing bytes");
  return w;
}

void save_model_weights(const ModelWeights& weights, const std::filesystem::path& path) {
  const auto bytes = serialize_model_weights(weights);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ModelWeights load_model_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_model_weights(bytes);
}

}  // namespace loco
