// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/io/report_io.hpp"

#include <cmath>
#include <set>

#include "romforge/common/error.hpp"

namespace romforge::io
{

namespace
{

/// NaN and infinities have no JSON form; they are written as null.
Json number(double v)
{
  return std::isfinite(v) ? Json(v) : Json(nullptr);
}

double number_or_nan(const Json &j)
{
  return j.is_null() ? std::nan("") : j.get<double>();
}

void reject_unknown(const Json &j, std::initializer_list<const char *> known, const char *what)
{
  if (!j.is_object())
  {
    throw ConfigError(std::string(what) + " must be a JSON object");
  }
  const std::set<std::string> names(known.begin(), known.end());
  for (const auto &[key, value] : j.items())
  {
    if (!names.count(key))
    {
      throw ConfigError(std::string("unknown key '") + key + "' in " + what);
    }
  }
}

template <typename T>
void read_into(const Json &j, const char *key, T &dst)
{
  if (!j.contains(key))
  {
    return;
  }
  try
  {
    dst = j.at(key).get<T>();
  }
  catch (const nlohmann::json::exception &)
  {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

Json epochs_json(const std::vector<autoenc::EpochRecord> &epochs)
{
  Json train = Json::array(), val = Json::array();
  for (const auto &e : epochs)
  {
    train.push_back(number(e.train_loss));
    val.push_back(number(e.validation_loss));
  }
  return {{"train_loss", train}, {"validation_loss", val}};
}

std::vector<autoenc::EpochRecord> epochs_from_json(const Json &j)
{
  const auto &train = j.at("train_loss");
  const auto &val = j.at("validation_loss");
  std::vector<autoenc::EpochRecord> out;
  for (std::size_t i = 0; i < train.size(); ++i)
  {
    out.push_back({static_cast<int>(i) + 1, number_or_nan(train[i]), number_or_nan(val.at(i))});
  }
  return out;
}

}  // namespace

Json to_json(const autoenc::AutoencoderConfig &c)
{
  return {{"encoder_channels", c.encoder_channels},
          {"encoder_strides", c.encoder_strides},
          {"latent_dim", c.latent_dim},
          {"kernel", c.kernel},
          {"batch", c.batch},
          {"max_lr", c.max_lr},
          {"epochs", c.epochs},
          {"seed", c.seed},
          {"validation_fraction", c.validation_fraction}};
}

autoenc::AutoencoderConfig autoencoder_config_from_json(const Json &j, autoenc::AutoencoderConfig c)
{
  reject_unknown(j,
                 {"encoder_channels", "encoder_strides", "latent_dim", "kernel", "batch", "max_lr", "epochs", "seed",
                  "validation_fraction"},
                 "autoencoder config");
  read_into(j, "encoder_channels", c.encoder_channels);
  read_into(j, "encoder_strides", c.encoder_strides);
  read_into(j, "latent_dim", c.latent_dim);
  read_into(j, "kernel", c.kernel);
  read_into(j, "batch", c.batch);
  read_into(j, "max_lr", c.max_lr);
  read_into(j, "epochs", c.epochs);
  read_into(j, "seed", c.seed);
  read_into(j, "validation_fraction", c.validation_fraction);
  return c;
}

Json to_json(const rom::MlpConfig &c)
{
  return {{"hidden_layers", c.hidden_layers}, {"neurons", c.neurons}, {"dropout", c.dropout},
          {"max_lr", c.max_lr},               {"batch", c.batch},     {"epochs", c.epochs},
          {"seed", c.seed},                   {"validation_fraction", c.validation_fraction}};
}

rom::MlpConfig mlp_config_from_json(const Json &j, rom::MlpConfig c)
{
  reject_unknown(j, {"hidden_layers", "neurons", "dropout", "max_lr", "batch", "epochs", "seed", "validation_fraction"},
                 "mlp config");
  read_into(j, "hidden_layers", c.hidden_layers);
  read_into(j, "neurons", c.neurons);
  read_into(j, "dropout", c.dropout);
  read_into(j, "max_lr", c.max_lr);
  read_into(j, "batch", c.batch);
  read_into(j, "epochs", c.epochs);
  read_into(j, "seed", c.seed);
  read_into(j, "validation_fraction", c.validation_fraction);
  return c;
}

Json to_json(const rom::OfflineConfig &c)
{
  return {{"solution_ae", to_json(c.solution_ae)},
          {"domain_ae", to_json(c.domain_ae)},
          {"mlp", to_json(c.mlp)},
          {"mode", rom::mode_name(c.mode)},
          {"domain_set_size", c.domain_set_size},
          {"domain_set_seed", c.domain_set_seed},
          {"degenerate_features", c.degenerate_policy == autoenc::DegeneratePolicy::Error ? "error" : "pass_through"}};
}

rom::OfflineConfig offline_config_from_json(const Json &j, rom::OfflineConfig c)
{
  reject_unknown(j, {"solution_ae", "domain_ae", "mlp", "mode", "domain_set_size", "domain_set_seed",
                     "degenerate_features"},
                 "offline config");
  if (j.contains("solution_ae"))
  {
    c.solution_ae = autoencoder_config_from_json(j.at("solution_ae"), c.solution_ae);
  }
  if (j.contains("domain_ae"))
  {
    c.domain_ae = autoencoder_config_from_json(j.at("domain_ae"), c.domain_ae);
  }
  if (j.contains("mlp"))
  {
    c.mlp = mlp_config_from_json(j.at("mlp"), c.mlp);
  }
  if (j.contains("mode"))
  {
    c.mode = rom::parse_mode(j.at("mode").get<std::string>());
  }
  read_into(j, "domain_set_size", c.domain_set_size);
  read_into(j, "domain_set_seed", c.domain_set_seed);
  if (j.contains("degenerate_features"))
  {
    const auto v = j.at("degenerate_features").get<std::string>();
    if (v != "error" && v != "pass_through")
    {
      throw ConfigError("degenerate_features must be 'error' or 'pass_through'");
    }
    c.degenerate_policy = v == "error" ? autoenc::DegeneratePolicy::Error : autoenc::DegeneratePolicy::PassThrough;
  }
  return c;
}

Json to_json(const rom::GridMenus &m)
{
  return {{"hidden_layers", m.hidden_layers}, {"neurons", m.neurons}, {"dropout", m.dropout},
          {"max_lr", m.max_lr},               {"batch", m.batch},     {"epochs", m.epochs}};
}

rom::GridMenus grid_menus_from_json(const Json &j, rom::GridMenus m)
{
  reject_unknown(j, {"hidden_layers", "neurons", "dropout", "max_lr", "batch", "epochs"}, "grid menus");
  read_into(j, "hidden_layers", m.hidden_layers);
  read_into(j, "neurons", m.neurons);
  read_into(j, "dropout", m.dropout);
  read_into(j, "max_lr", m.max_lr);
  read_into(j, "batch", m.batch);
  read_into(j, "epochs", m.epochs);
  return m;
}

Json to_json(const geometry::HoleShape &h)
{
  return {{"kind", h.kind == geometry::HoleKind::Circle ? "circle" : "ellipse"},
          {"x0", h.x0},
          {"y0", h.y0},
          {"a", h.a},
          {"b", h.b},
          {"angle", h.angle}};
}

Json to_json(const geometry::DomainSpec &d)
{
  Json holes = Json::array();
  for (const auto &h : d.holes)
  {
    holes.push_back(to_json(h));
  }
  return {{"holes", holes}};
}

geometry::DomainSpec domain_from_json(const Json &j)
{
  reject_unknown(j, {"holes"}, "domain");
  geometry::DomainSpec d;
  for (const auto &h : j.value("holes", Json::array()))
  {
    reject_unknown(h, {"kind", "x0", "y0", "a", "b", "angle", "r"}, "hole");
    const std::string kind = h.value("kind", "circle");
    if (kind == "circle")
    {
      const double r = h.contains("r") ? h.at("r").get<double>() : h.at("a").get<double>();
      d.holes.push_back(geometry::HoleShape::circle(h.at("x0").get<double>(), h.at("y0").get<double>(), r));
    }
    else if (kind == "ellipse")
    {
      d.holes.push_back(geometry::HoleShape::ellipse(h.at("x0").get<double>(), h.at("y0").get<double>(),
                                                     h.at("a").get<double>(), h.at("b").get<double>(),
                                                     h.value("angle", 0.0)));
    }
    else
    {
      throw ConfigError("hole kind must be 'circle' or 'ellipse'");
    }
  }
  return d;
}

Json to_json(const fom::EquationParams &p)
{
  return {{"phi", p.phi},
          {"beta", p.beta},
          {"mu", p.mu},
          {"dirichlet_hole_value", p.dirichlet_hole_value},
          {"advection_scale", p.advection_scale},
          {"rhs_const", p.rhs_const}};
}

fom::EquationParams equation_params_from_json(const Json &j, fom::EquationParams p)
{
  reject_unknown(j, {"phi", "beta", "mu", "dirichlet_hole_value", "advection_scale", "rhs_const"}, "equation params");
  read_into(j, "phi", p.phi);
  read_into(j, "beta", p.beta);
  read_into(j, "mu", p.mu);
  read_into(j, "dirichlet_hole_value", p.dirichlet_hole_value);
  read_into(j, "advection_scale", p.advection_scale);
  read_into(j, "rhs_const", p.rhs_const);
  return p;
}

Json to_json(const autoenc::TrainReport &r)
{
  Json j = epochs_json(r.epochs);
  j["train_count"] = r.train_count;
  j["validation_count"] = r.validation_count;
  j["steps"] = r.steps;
  return j;
}

Json to_json(const rom::PhiReport &r)
{
  Json j = epochs_json(r.epochs);
  j["best_epoch"] = r.best_epoch;
  j["best_validation_mse"] = number(r.best_validation_mse);
  j["baseline_validation_mse"] = number(r.baseline_validation_mse);
  j["train_count"] = r.train_count;
  j["validation_count"] = r.validation_count;
  return j;
}

Json to_json(const rom::OfflineReport &r)
{
  return {{"solution_ae", to_json(r.solution_ae)},
          {"domain_ae", to_json(r.domain_ae)},
          {"phi", to_json(r.phi)},
          {"domain_set_size", r.domain_set_size},
          {"domain_validation_accuracy", number(r.domain_validation_accuracy)},
          {"warnings", r.warnings}};
}

rom::OfflineReport offline_report_from_json(const Json &j)
{
  rom::OfflineReport r;
  for (auto [dst, key] : {std::pair{&r.solution_ae, "solution_ae"}, std::pair{&r.domain_ae, "domain_ae"}})
  {
    const auto &t = j.at(key);
    dst->epochs = epochs_from_json(t);
    dst->train_count = t.at("train_count").get<std::size_t>();
    dst->validation_count = t.at("validation_count").get<std::size_t>();
    dst->steps = t.at("steps").get<long>();
  }
  const auto &p = j.at("phi");
  r.phi.epochs = epochs_from_json(p);
  r.phi.best_epoch = p.at("best_epoch").get<int>();
  r.phi.best_validation_mse = number_or_nan(p.at("best_validation_mse"));
  r.phi.baseline_validation_mse = number_or_nan(p.at("baseline_validation_mse"));
  r.phi.train_count = p.at("train_count").get<std::size_t>();
  r.phi.validation_count = p.at("validation_count").get<std::size_t>();
  r.domain_set_size = j.at("domain_set_size").get<std::size_t>();
  r.domain_validation_accuracy = number_or_nan(j.at("domain_validation_accuracy"));
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

Json to_json(const fom::Field &f)
{
  Json values = Json::array();
  for (double v : f.values)
  {
    values.push_back(number(v));
  }
  return {{"height", f.height}, {"width", f.width}, {"values", values}};
}

Json to_json(const metrics::EvalReport &r)
{
  Json errors = Json::array();
  for (double e : r.errors)
  {
    errors.push_back(number(e));
  }
  Json pixel = Json::array();
  for (const auto &p : r.pixel_errors)
  {
    pixel.push_back({{"label", p.label}, {"index", p.index}, {"error", number(p.error)}, {"field", to_json(p.field)}});
  }
  return {{"mode", r.mode},
          {"bundle_fingerprint", r.bundle_fingerprint},
          {"dataset_fingerprint", r.dataset_fingerprint},
          {"count", r.errors.size()},
          {"errors", errors},
          {"mean", number(r.summary.mean)},
          {"median", number(r.summary.median)},
          {"min", number(r.summary.min)},
          {"max", number(r.summary.max)},
          {"pixel_errors", pixel}};
}

Json to_json(const rom::GridSearchResult &r)
{
  Json rows = Json::array();
  std::size_t rank = 1;
  for (const auto &c : r.ranked)
  {
    rows.push_back({{"rank", rank++},
                    {"index", c.index},
                    {"config", to_json(c.config)},
                    {"best_validation_mse", number(c.best_validation_mse)},
                    {"baseline_validation_mse", number(c.baseline_validation_mse)},
                    {"best_epoch", c.best_epoch},
                    {"failed", c.failed},
                    {"failure", c.failure}});
  }
  return {{"space_size", r.space_size}, {"evaluated", r.ranked.size()}, {"ranked", rows}};
}

Json to_json(const std::vector<metrics::SensitivityRow> &rows)
{
  Json out = Json::array();
  for (const auto &r : rows)
  {
    out.push_back({{"ratio", r.ratio},
                   {"error", number(r.error)},
                   {"reference_error", r.reference < 0 ? Json(nullptr) : Json(r.reference)}});
  }
  return out;
}

Json to_json(const autoenc::StandardizationStats &s)
{
  return {{"solution_mean", s.solution_mean},
          {"solution_std", s.solution_std},
          {"feature_mean", s.feature_mean},
          {"feature_std", s.feature_std},
          {"degenerate_features", s.degenerate_features}};
}

autoenc::StandardizationStats stats_from_json(const Json &j)
{
  autoenc::StandardizationStats s;
  s.solution_mean = j.at("solution_mean").get<double>();
  s.solution_std = j.at("solution_std").get<double>();
  s.feature_mean = j.at("feature_mean").get<std::vector<double>>();
  s.feature_std = j.at("feature_std").get<std::vector<double>>();
  s.degenerate_features = j.at("degenerate_features").get<std::vector<std::size_t>>();
  return s;
}

std::string dump(const Json &j)
{
  return j.dump(2) + "\n";
}

}  // namespace romforge::io
