// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#include "detm/numcore/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "detm/errors.hpp"

namespace detm::nc {
namespace {

static_assert(sizeof(double) == 8);

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return r;
}

}  // namespace

void write_tensor_file(const std::filesystem::path& path, const Tensor& t) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write tensor file " + path.string());
  for (double v : t.data()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    bits = to_le(bits);
    out.write(reinterpret_cast<const char*>(&bits), 8);
  }
  if (!out) throw DataError("failed writing tensor file " + path.string());
}

Tensor read_tensor_file(const std::filesystem::path& path, const Shape& shape) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read tensor file " + path.string());
  Tensor t(shape);
  for (auto& v : t.data()) {
    std::uint64_t bits;
    if (!in.read(reinterpret_cast<char*>(&bits), 8)) {
      throw DataError("tensor file " + path.string() + " is shorter than shape " + shape_str(shape));
    }
    bits = to_le(bits);
    std::memcpy(&v, &bits, 8);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError("tensor file " + path.string() + " is longer than shape " + shape_str(shape));
  }
  return t;
}

nlohmann::json save_tensors(const std::filesystem::path& dir, const TensorMap& tensors,
                            const std::string& subdir) {
  nlohmann::json manifest = nlohmann::json::object();
  for (const auto& [name, t] : tensors) {
    const std::string rel = subdir + "/" + name + ".bin";
    write_tensor_file(dir / rel, t);
    manifest[name] = {{"shape", t.shape()}, {"dtype", "float64"}, {"file", rel}};
  }
  return manifest;
}

TensorMap load_tensors(const std::filesystem::path& dir, const nlohmann::json& manifest) {
  TensorMap out;
  for (const auto& [name, entry] : manifest.items()) {
    if (entry.value("dtype", "") != "float64") throw DataError("tensor '" + name + "': unsupported dtype");
    const Shape shape = entry.at("shape").get<Shape>();
    out.emplace(name, read_tensor_file(dir / entry.at("file").get<std::string>(), shape));
  }
  return out;
}

}  // namespace detm::nc
