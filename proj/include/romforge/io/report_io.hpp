// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_IO_REPORT_IO_HPP
#define ROMFORGE_IO_REPORT_IO_HPP

#include <json.hpp>

#include "romforge/autoenc/autoencoder.hpp"
#include "romforge/geometry/geometry.hpp"
#include "romforge/metrics/metrics.hpp"
#include "romforge/rom/grid_search.hpp"
#include "romforge/rom/rom.hpp"

namespace romforge::io
{

using Json = nlohmann::json;

// Configurations. The readers start from the given defaults and override
// only keys present in the JSON; unknown keys raise ConfigError.
Json to_json(const autoenc::AutoencoderConfig &c);
Json to_json(const rom::MlpConfig &c);
Json to_json(const rom::OfflineConfig &c);
Json to_json(const rom::GridMenus &m);
autoenc::AutoencoderConfig autoencoder_config_from_json(const Json &j, autoenc::AutoencoderConfig defaults);
rom::MlpConfig mlp_config_from_json(const Json &j, rom::MlpConfig defaults);
rom::OfflineConfig offline_config_from_json(const Json &j, rom::OfflineConfig defaults = {});
rom::GridMenus grid_menus_from_json(const Json &j, rom::GridMenus defaults = {});

// Geometry.
Json to_json(const geometry::HoleShape &h);
Json to_json(const geometry::DomainSpec &d);
geometry::DomainSpec domain_from_json(const Json &j);
Json to_json(const fom::EquationParams &p);
fom::EquationParams equation_params_from_json(const Json &j, fom::EquationParams defaults = {});

// Reports.
Json to_json(const autoenc::TrainReport &r);
Json to_json(const rom::PhiReport &r);
Json to_json(const rom::OfflineReport &r);
rom::OfflineReport offline_report_from_json(const Json &j);
Json to_json(const metrics::EvalReport &r);
Json to_json(const rom::GridSearchResult &r);
Json to_json(const std::vector<metrics::SensitivityRow> &rows);
Json to_json(const autoenc::StandardizationStats &s);
autoenc::StandardizationStats stats_from_json(const Json &j);
Json to_json(const fom::Field &f);

/// Stable text form: sorted keys, two-space indent, trailing newline.
std::string dump(const Json &j);

}  // namespace romforge::io

#endif  // ROMFORGE_IO_REPORT_IO_HPP
