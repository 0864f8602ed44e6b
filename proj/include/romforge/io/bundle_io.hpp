// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_IO_BUNDLE_IO_HPP
#define ROMFORGE_IO_BUNDLE_IO_HPP

#include <filesystem>
#include <string>

#include "romforge/rom/rom.hpp"

namespace romforge::io
{

inline constexpr int kBundleFormatVersion = 1;

/// Writes bundle.json plus one checkpoint per network. Domain networks are
/// omitted for exact_only bundles.
void save_bundle(rom::RomBundle &bundle, const std::filesystem::path &dir);

/// Loads a bundle, verifying each checkpoint against the hashes recorded in
/// bundle.json and the cross-component dimensions.
rom::RomBundle load_bundle(const std::filesystem::path &dir);

/// SHA-256 of bundle.json, which in turn pins every checkpoint file.
std::string bundle_fingerprint(const std::filesystem::path &dir);

}  // namespace romforge::io

#endif  // ROMFORGE_IO_BUNDLE_IO_HPP
