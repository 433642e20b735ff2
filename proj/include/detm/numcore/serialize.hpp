// Copyright (c) 2026, The detm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include <json.hpp>

#include "detm/numcore/params.hpp"

// On-disk tensors: raw row-major little-endian float64 arrays, one file per
// tensor, described by a JSON manifest entry
//   "<name>": {"shape": [r, c], "dtype": "float64", "file": "tensors/<name>.bin"}

namespace detm::nc {

void write_tensor_file(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor_file(const std::filesystem::path& path, const Shape& shape);

/// Writes every tensor under `dir` and returns the manifest object.
nlohmann::json save_tensors(const std::filesystem::path& dir, const TensorMap& tensors,
                            const std::string& subdir = "tensors");
TensorMap load_tensors(const std::filesystem::path& dir, const nlohmann::json& manifest);

}  // namespace detm::nc
