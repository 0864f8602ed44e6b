// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_IO_DATASET_IO_HPP
#define ROMFORGE_IO_DATASET_IO_HPP

#include <filesystem>
#include <string>

#include "romforge/fom/dataset.hpp"

namespace romforge::io
{

inline constexpr int kDatasetFormatVersion = 1;

/// Writes manifest.json, params.f32le, solutions.f32le and masks.u8.
/// The directory is created if needed; existing files are replaced.
void write_dataset(const fom::SnapshotDataset &dataset, const std::filesystem::path &dir);

/// Reads and validates a dataset directory. Missing or inconsistent files
/// raise FormatError.
fom::SnapshotDataset read_dataset(const std::filesystem::path &dir);

/// SHA-256 over the serialized dataset; equal for a dataset and its
/// write-then-read copy.
std::string dataset_fingerprint(const fom::SnapshotDataset &dataset);

}  // namespace romforge::io

#endif  // ROMFORGE_IO_DATASET_IO_HPP
