// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_IO_BINARY_HPP
#define ROMFORGE_IO_BINARY_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace romforge::io
{

static_assert(std::endian::native == std::endian::little, "on-disk formats assume a little-endian host");

/// Whole-file helpers; failures raise FormatError naming the path.
std::vector<std::uint8_t> read_file(const std::filesystem::path &path);
std::string read_text(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path &path, const std::string &text);

class ByteWriter
{
public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void text(const std::string &s) { raw(s.data(), s.size()); }
  template <typename T>
  void values(std::span<const T> v)
  {
    raw(v.data(), v.size_bytes());
  }
  const std::vector<std::uint8_t> &bytes() const { return bytes_; }

private:
  void raw(const void *p, std::size_t n)
  {
    const auto *b = static_cast<const std::uint8_t *>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked reader; truncation raises FormatError.
class ByteReader
{
public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string context)
    : bytes_(bytes), context_(std::move(context))
  {
  }
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::string text(std::size_t n);
  template <typename T>
  std::vector<T> values(std::size_t count)
  {
    std::vector<T> out(count);
    raw(out.data(), count * sizeof(T));
    return out;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

private:
  void raw(void *dst, std::size_t n);
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::string context_;
};

}  // namespace romforge::io

#endif  // ROMFORGE_IO_BINARY_HPP
