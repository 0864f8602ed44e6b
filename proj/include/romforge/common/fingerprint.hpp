// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_COMMON_FINGERPRINT_HPP
#define ROMFORGE_COMMON_FINGERPRINT_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace romforge
{

/// Incremental SHA-256 used for content fingerprints.
class Fingerprint
{
public:
  Fingerprint();
  ~Fingerprint();
  Fingerprint(const Fingerprint &) = delete;
  Fingerprint &operator=(const Fingerprint &) = delete;

  Fingerprint &update(std::span<const std::byte> bytes);
  Fingerprint &update(std::string_view text);

  template <typename T>
  Fingerprint &update_values(std::span<const T> values)
  {
    return update(std::as_bytes(values));
  }

  /// Lower-case hex digest. The object must not be updated afterwards.
  std::string hex();

  /// First eight digest bytes, little-endian, for use as a seed.
  std::uint64_t seed();

private:
  void *ctx_;
};

std::string sha256_hex(std::string_view text);
std::string sha256_file(const std::filesystem::path &path);

}  // namespace romforge

#endif  // ROMFORGE_COMMON_FINGERPRINT_HPP
