// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/common/fingerprint.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <vector>

#include "romforge/common/error.hpp"

namespace romforge
{

namespace
{

EVP_MD_CTX *as_ctx(void *p) { return static_cast<EVP_MD_CTX *>(p); }

std::array<unsigned char, 32> finish(void *ctx)
{
  std::array<unsigned char, 32> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(as_ctx(ctx), digest.data(), &len);
  return digest;
}

}  // namespace

Fingerprint::Fingerprint() : ctx_(EVP_MD_CTX_new())
{
  EVP_DigestInit_ex(as_ctx(ctx_), EVP_sha256(), nullptr);
}

Fingerprint::~Fingerprint() { EVP_MD_CTX_free(as_ctx(ctx_)); }

Fingerprint &Fingerprint::update(std::span<const std::byte> bytes)
{
  EVP_DigestUpdate(as_ctx(ctx_), bytes.data(), bytes.size());
  return *this;
}

Fingerprint &Fingerprint::update(std::string_view text)
{
  EVP_DigestUpdate(as_ctx(ctx_), text.data(), text.size());
  return *this;
}

std::string Fingerprint::hex()
{
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : finish(ctx_))
  {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 0xf]);
  }
  return out;
}

std::uint64_t Fingerprint::seed()
{
  const auto digest = finish(ctx_);
  std::uint64_t s = 0;
  for (int i = 7; i >= 0; --i)
  {
    s = (s << 8) | digest[static_cast<std::size_t>(i)];
  }
  return s;
}

std::string sha256_hex(std::string_view text)
{
  Fingerprint fp;
  fp.update(text);
  return fp.hex();
}

std::string sha256_file(const std::filesystem::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw FormatError("cannot open " + path.string() + " for fingerprinting");
  }
  Fingerprint fp;
  std::vector<char> buffer(1 << 16);
  while (in)
  {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    fp.update(std::as_bytes(std::span<const char>(buffer.data(), got)));
  }
  return fp.hex();
}

}  // namespace romforge
