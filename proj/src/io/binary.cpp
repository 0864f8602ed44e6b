// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/io/binary.hpp"

#include <fstream>
#include <iterator>

#include "romforge/common/error.hpp"

namespace romforge::io
{

std::vector<std::uint8_t> read_file(const std::filesystem::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw FormatError("cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::filesystem::path &path)
{
  const auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

void write_file(const std::filesystem::path &path, std::span<const std::uint8_t> bytes)
{
  if (path.has_parent_path())
  {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out)
  {
    throw FormatError("cannot write " + path.string());
  }
}

void write_text(const std::filesystem::path &path, const std::string &text)
{
  write_file(path, std::span(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

std::uint8_t ByteReader::u8()
{
  std::uint8_t v;
  raw(&v, 1);
  return v;
}

std::uint32_t ByteReader::u32()
{
  std::uint32_t v;
  raw(&v, sizeof v);
  return v;
}

std::uint64_t ByteReader::u64()
{
  std::uint64_t v;
  raw(&v, sizeof v);
  return v;
}

std::string ByteReader::text(std::size_t n)
{
  std::string s(n, '\0');
  raw(s.data(), n);
  return s;
}

void ByteReader::raw(void *dst, std::size_t n)
{
  if (n > remaining())
  {
    throw FormatError(context_ + ": unexpected end of data");
  }
  std::memcpy(dst, bytes_.data() + pos_, n);
  pos_ += n;
}

}  // namespace romforge::io
