// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/io/dataset_io.hpp"

#include "romforge/common/error.hpp"
#include "romforge/common/fingerprint.hpp"
#include "romforge/io/binary.hpp"
#include "romforge/io/report_io.hpp"

namespace romforge::io
{

namespace
{

template <typename T>
std::span<const std::uint8_t> as_bytes(const std::vector<T> &v)
{
  return {reinterpret_cast<const std::uint8_t *>(v.data()), v.size() * sizeof(T)};
}

Json file_entry(const char *name, std::vector<std::size_t> shape, std::span<const std::uint8_t> bytes)
{
  Fingerprint fp;
  fp.update(std::as_bytes(bytes));
  return {{"name", name}, {"shape", shape}, {"bytes", bytes.size()}, {"sha256", fp.hex()}};
}

Json manifest_json(const fom::SnapshotDataset &ds)
{
  Json schema = Json::array();
  for (const auto &p : ds.schema)
  {
    schema.push_back({{"name", p.name}, {"role", p.role == fom::ParamRole::Geometry ? "geometry" : "equation"}});
  }
  Json samples = Json::array();
  for (const auto &d : ds.domains)
  {
    Json s = to_json(d);
    s["hole_count"] = d.holes.size();
    samples.push_back(std::move(s));
  }
  const auto n = ds.size();
  const auto grid = static_cast<std::size_t>(ds.grid);
  return {{"format", "romforge-dataset"},
          {"version", kDatasetFormatVersion},
          {"problem", geometry::problem_name(ds.problem)},
          {"count", n},
          {"grid", ds.grid},
          {"seed", ds.seed},
          {"hole_value", ds.hole_value},
          {"schema", schema},
          {"samples", samples},
          {"files",
           {{"params", file_entry("params.f32le", {n, ds.param_dim()}, as_bytes(ds.params))},
            {"solutions", file_entry("solutions.f32le", {n, grid, grid}, as_bytes(ds.solutions))},
            {"masks", file_entry("masks.u8", {n, grid, grid}, as_bytes(ds.masks))}}}};
}

void check_consistent(const fom::SnapshotDataset &ds)
{
  const auto n = ds.size();
  if (ds.params.size() != n * ds.param_dim() || ds.solutions.size() != n * ds.pixels() ||
      ds.masks.size() != n * ds.pixels())
  {
    throw FormatError("dataset arrays do not match its sample count and grid");
  }
}

template <typename T>
std::vector<T> read_array(const std::filesystem::path &path, std::size_t count)
{
  const auto bytes = read_file(path);
  if (bytes.size() != count * sizeof(T))
  {
    throw FormatError(path.string() + ": expected " + std::to_string(count * sizeof(T)) + " bytes, found " +
                      std::to_string(bytes.size()));
  }
  ByteReader reader(bytes, path.string());
  return reader.values<T>(count);
}

}  // namespace

void write_dataset(const fom::SnapshotDataset &ds, const std::filesystem::path &dir)
{
  check_consistent(ds);
  write_file(dir / "params.f32le", as_bytes(ds.params));
  write_file(dir / "solutions.f32le", as_bytes(ds.solutions));
  write_file(dir / "masks.u8", as_bytes(ds.masks));
  write_text(dir / "manifest.json", dump(manifest_json(ds)));
}

fom::SnapshotDataset read_dataset(const std::filesystem::path &dir)
{
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::is_directory(dir))
  {
    throw FormatError("dataset directory not found: " + dir.string());
  }
  Json m;
  try
  {
    m = Json::parse(read_text(manifest_path));
  }
  catch (const nlohmann::json::parse_error &e)
  {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }

  fom::SnapshotDataset ds;
  try
  {
    if (m.at("format").get<std::string>() != "romforge-dataset")
    {
      throw FormatError(manifest_path.string() + ": not a dataset manifest");
    }
    if (m.at("version").get<int>() != kDatasetFormatVersion)
    {
      throw FormatError(manifest_path.string() + ": unsupported dataset version " +
                        std::to_string(m.at("version").get<int>()));
    }
    ds.problem = geometry::parse_problem(m.at("problem").get<std::string>().c_str());
    ds.grid = m.at("grid").get<int>();
    ds.seed = m.at("seed").get<std::uint64_t>();
    ds.hole_value = m.at("hole_value").get<double>();
    for (const auto &p : m.at("schema"))
    {
      const auto role = p.at("role").get<std::string>();
      if (role != "geometry" && role != "equation")
      {
        throw FormatError(manifest_path.string() + ": unknown parameter role '" + role + "'");
      }
      ds.schema.push_back({p.at("name").get<std::string>(),
                           role == "geometry" ? fom::ParamRole::Geometry : fom::ParamRole::Equation});
    }
    for (const auto &s : m.at("samples"))
    {
      Json holes = {{"holes", s.at("holes")}};
      ds.domains.push_back(domain_from_json(holes));
    }
  }
  catch (const nlohmann::json::exception &e)
  {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  catch (const ConfigError &e)
  {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }

  const auto n = m.at("count").get<std::size_t>();
  if (ds.domains.size() != n || ds.grid <= 0)
  {
    throw FormatError(manifest_path.string() + ": sample list does not match count");
  }
  ds.params = read_array<float>(dir / "params.f32le", n * ds.param_dim());
  ds.solutions = read_array<float>(dir / "solutions.f32le", n * ds.pixels());
  ds.masks = read_array<std::uint8_t>(dir / "masks.u8", n * ds.pixels());
  for (auto v : ds.masks)
  {
    if (v > 1)
    {
      throw FormatError((dir / "masks.u8").string() + ": mask values must be 0 or 1");
    }
  }
  if (manifest_json(ds) != m)
  {
    throw FormatError(manifest_path.string() + ": manifest does not match the array files");
  }
  return ds;
}

std::string dataset_fingerprint(const fom::SnapshotDataset &ds)
{
  return sha256_hex(dump(manifest_json(ds)));
}

}  // namespace romforge::io
