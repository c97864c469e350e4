// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperrec/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "hyperrec/error.hpp"

namespace hyperrec {

namespace {

// Rank above this is treated as a corrupt record.
constexpr std::uint64_t kMaxRank = 16;

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<unsigned char, 8> bytes{};
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes.data()), 8);
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), 8)) {
    throw ParseError("tensor record truncated");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void write_tensor(std::ostream& out, const Tensor& t) {
  out.write(kTensorMagic.data(), static_cast<std::streamsize>(kTensorMagic.size()));
  put_u64(out, t.rank());
  for (std::size_t e : t.shape()) put_u64(out, e);
  for (double v : t.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw IoError("failed writing tensor record");
}

Tensor read_tensor(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), 8) ||
      std::string_view(magic.data(), 8) != kTensorMagic) {
    throw ParseError("bad tensor magic header");
  }
  const std::uint64_t rank = get_u64(in);
  if (rank > kMaxRank) throw ParseError("tensor rank " + std::to_string(rank) + " too large");
  std::vector<std::size_t> shape(rank);
  for (auto& e : shape) e = static_cast<std::size_t>(get_u64(in));
  Tensor t(shape);
  for (double& v : t.data()) v = std::bit_cast<double>(get_u64(in));
  return t;
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_tensor(out, t);
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_tensor(in);
}

}  // namespace hyperrec
