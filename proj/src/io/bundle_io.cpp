// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/io/bundle_io.hpp"

#include "romforge/common/error.hpp"
#include "romforge/common/fingerprint.hpp"
#include "romforge/io/binary.hpp"
#include "romforge/io/checkpoint.hpp"
#include "romforge/io/report_io.hpp"

namespace romforge::io
{

namespace
{

struct NetworkSlot
{
  const char *key;
  nn::Sequential<float> rom::RomBundle::*member;
  bool domain;
};

constexpr NetworkSlot kSlots[] = {
    {"solution_encoder", &rom::RomBundle::solution_encoder, false},
    {"solution_decoder", &rom::RomBundle::solution_decoder, false},
    {"domain_encoder", &rom::RomBundle::domain_encoder, true},
    {"domain_decoder", &rom::RomBundle::domain_decoder, true},
    {"phi", &rom::RomBundle::phi, false},
};

}  // namespace

void save_bundle(rom::RomBundle &bundle, const std::filesystem::path &dir)
{
  bundle.check_consistency();
  std::filesystem::create_directories(dir);

  Json files = Json::object();
  for (const auto &slot : kSlots)
  {
    if (slot.domain && !bundle.uses_domain_codes())
    {
      continue;
    }
    const std::string name = std::string(slot.key) + ".romf";
    save_network(dir / name, bundle.*slot.member, {{"role", slot.key}});
    files[slot.key] = {{"name", name}, {"sha256", sha256_file(dir / name)}};
  }

  Json schema = Json::array();
  for (const auto &p : bundle.param_schema)
  {
    schema.push_back({{"name", p.name}, {"role", p.role == fom::ParamRole::Geometry ? "geometry" : "equation"}});
  }
  const Json manifest = {{"format", "romforge-bundle"},
                         {"version", kBundleFormatVersion},
                         {"mode", rom::mode_name(bundle.mode)},
                         {"problem", geometry::problem_name(bundle.problem)},
                         {"grid", bundle.grid},
                         {"param_schema", schema},
                         {"param_columns", bundle.param_columns},
                         {"solution_latent", bundle.solution_latent},
                         {"domain_latent", bundle.domain_latent},
                         {"feature_dim", bundle.feature_dim},
                         {"stats", to_json(bundle.stats)},
                         {"config", to_json(bundle.config)},
                         {"report", to_json(bundle.report)},
                         {"dataset_fingerprint", bundle.dataset_fingerprint},
                         {"files", files}};
  write_text(dir / "bundle.json", dump(manifest));
}

rom::RomBundle load_bundle(const std::filesystem::path &dir)
{
  const auto path = dir / "bundle.json";
  if (!std::filesystem::is_regular_file(path))
  {
    throw FormatError("bundle not found: " + path.string());
  }
  rom::RomBundle b;
  try
  {
    const Json m = Json::parse(read_text(path));
    if (m.at("format").get<std::string>() != "romforge-bundle" || m.at("version").get<int>() != kBundleFormatVersion)
    {
      throw FormatError(path.string() + ": not a supported bundle");
    }
    b.mode = rom::parse_mode(m.at("mode").get<std::string>());
    b.problem = geometry::parse_problem(m.at("problem").get<std::string>().c_str());
    b.grid = m.at("grid").get<int>();
    for (const auto &p : m.at("param_schema"))
    {
      b.param_schema.push_back({p.at("name").get<std::string>(), p.at("role").get<std::string>() == "geometry"
                                                                      ? fom::ParamRole::Geometry
                                                                      : fom::ParamRole::Equation});
    }
    b.param_columns = m.at("param_columns").get<std::vector<std::size_t>>();
    b.solution_latent = m.at("solution_latent").get<int>();
    b.domain_latent = m.at("domain_latent").get<int>();
    b.feature_dim = m.at("feature_dim").get<int>();
    b.stats = stats_from_json(m.at("stats"));
    b.config = offline_config_from_json(m.at("config"));
    b.report = offline_report_from_json(m.at("report"));
    b.dataset_fingerprint = m.at("dataset_fingerprint").get<std::string>();

    const auto &files = m.at("files");
    for (const auto &slot : kSlots)
    {
      if (slot.domain && !b.uses_domain_codes())
      {
        continue;
      }
      const auto &entry = files.at(slot.key);
      const auto file = dir / entry.at("name").get<std::string>();
      if (sha256_file(file) != entry.at("sha256").get<std::string>())
      {
        throw FormatError(file.string() + ": content hash does not match bundle.json");
      }
      b.*slot.member = load_network(file);
    }
  }
  catch (const nlohmann::json::exception &e)
  {
    throw FormatError(path.string() + ": " + e.what());
  }
  catch (const ConfigError &e)
  {
    throw FormatError(path.string() + ": " + e.what());
  }
  b.check_consistency();
  return b;
}

std::string bundle_fingerprint(const std::filesystem::path &dir)
{
  return sha256_file(dir / "bundle.json");
}

}  // namespace romforge::io
