// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "hyperrec/tensor.hpp"

namespace hyperrec {

/// Binary tensor record: 8-byte magic, little-endian u64 rank, u64 extents,
/// then the payload as little-endian IEEE-754 doubles.
inline constexpr std::string_view kTensorMagic = "HRECTNS1";

void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in);

void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

}  // namespace hyperrec
