// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>

#include "romforge/common/error.hpp"
#include "romforge/common/fingerprint.hpp"
#include "romforge/fom/dataset.hpp"
#include "romforge/io/binary.hpp"
#include "romforge/io/bundle_io.hpp"
#include "romforge/io/dataset_io.hpp"
#include "romforge/io/report_io.hpp"
#include "romforge/metrics/metrics.hpp"
#include "romforge/rom/grid_search.hpp"
#include "romforge/rom/rom.hpp"

namespace romforge::cli
{

namespace fs = std::filesystem;
using io::Json;

namespace
{

struct GenerateArgs
{
  std::string problem = "ellipse";
  std::size_t n = 0;
  int grid = 64;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  std::optional<double> mu_min, mu_max;
  std::string out;
};

struct OfflineArgs
{
  std::string data, config, out, mode;
  std::optional<std::uint64_t> seed;
  std::optional<int> sol_epochs, dom_epochs, phi_epochs;
  std::optional<std::size_t> domain_set_size;
  int log_every = 10;
};

struct OnlineArgs
{
  std::string bundle, data, sample, out;
  std::optional<std::size_t> index;
};

struct EvalArgs
{
  std::string bundle, data, predictions, out;
  bool no_pixel_errors = false;
};

struct GridArgs
{
  std::string bundle, data, menus, out;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  std::optional<int> epochs;
  double validation_fraction = 0.1;
};

struct SensitivityArgs
{
  std::string bundle, spec, out;
  std::vector<double> ratios{1.0, 0.95, 0.9, 0.8};
  double tol = 1e-8;
};

Json read_json_file(const std::string &path)
{
  try
  {
    return Json::parse(io::read_text(path));
  }
  catch (const nlohmann::json::parse_error &e)
  {
    throw ConfigError(path + ": " + e.what());
  }
}

/// Every command leaves its resolved configuration next to its outputs.
void write_resolved(const fs::path &out, const std::string &command, Json settings, Json inputs)
{
  io::write_text(out / "resolved_config.json",
                 io::dump({{"command", command}, {"settings", std::move(settings)}, {"inputs", std::move(inputs)}}));
}

Json dataset_input(const std::string &path, const fom::SnapshotDataset &ds)
{
  return {{"path", path}, {"fingerprint", io::dataset_fingerprint(ds)}};
}

Json bundle_input(const std::string &path)
{
  return {{"path", path}, {"fingerprint", io::bundle_fingerprint(path)}};
}

void write_fields(const fs::path &path, const std::vector<fom::Field> &fields)
{
  io::ByteWriter w;
  for (const auto &f : fields)
  {
    w.values(std::span<const double>(f.values));
  }
  io::write_file(path, w.bytes());
}

std::vector<fom::Field> read_fields(const fs::path &path, std::size_t count, int grid)
{
  const auto bytes = io::read_file(path);
  const std::size_t px = static_cast<std::size_t>(grid) * grid;
  if (bytes.size() != count * px * sizeof(double))
  {
    throw FormatError(path.string() + ": expected " + std::to_string(count) + " fields of " + std::to_string(grid) +
                      "x" + std::to_string(grid));
  }
  io::ByteReader r(bytes, path.string());
  std::vector<fom::Field> out(count, fom::Field(grid, grid));
  for (auto &f : out)
  {
    f.values = r.values<double>(px);
  }
  return out;
}

int cmd_generate(const GenerateArgs &a, std::ostream &out, std::ostream &log)
{
  fom::GenerateOptions opt;
  opt.problem = geometry::parse_problem(a.problem.c_str());
  opt.n = a.n;
  opt.grid = a.grid;
  opt.seed = a.seed;
  opt.linear_solver_tol = a.tol;
  if (a.mu_min.has_value() != a.mu_max.has_value())
  {
    throw ConfigError("--mu-min and --mu-max go together");
  }
  if (a.mu_min)
  {
    opt.mu_range = std::pair{*a.mu_min, *a.mu_max};
  }
  log << "generating " << a.n << " " << a.problem << " samples on a " << a.grid << "x" << a.grid << " grid\n";
  const auto ds = fom::generate_dataset(opt);
  io::write_dataset(ds, a.out);
  Json settings = {{"problem", a.problem}, {"n", a.n},     {"grid", a.grid},
                   {"seed", a.seed},       {"tol", a.tol}, {"mu_range", nullptr}};
  if (a.mu_min)
  {
    settings["mu_range"] = {*a.mu_min, *a.mu_max};
  }
  write_resolved(a.out, "generate", settings, Json::object());
  out << io::dataset_fingerprint(ds) << "\n";
  return kOk;
}

int cmd_offline(const OfflineArgs &a, std::ostream &out, std::ostream &log)
{
  rom::OfflineConfig config;
  Json inputs = Json::object();
  if (!a.config.empty())
  {
    config = io::offline_config_from_json(read_json_file(a.config));
    inputs["config"] = {{"path", a.config}, {"fingerprint", sha256_file(a.config)}};
  }
  if (!a.mode.empty())
  {
    config.mode = rom::parse_mode(a.mode);
  }
  if (a.seed)
  {
    config.solution_ae.seed = *a.seed;
    config.domain_ae.seed = *a.seed;
    config.mlp.seed = *a.seed;
  }
  if (a.sol_epochs)
  {
    config.solution_ae.epochs = *a.sol_epochs;
  }
  if (a.dom_epochs)
  {
    config.domain_ae.epochs = *a.dom_epochs;
  }
  if (a.phi_epochs)
  {
    config.mlp.epochs = *a.phi_epochs;
  }
  if (a.domain_set_size)
  {
    config.domain_set_size = *a.domain_set_size;
  }

  const auto ds = io::read_dataset(a.data);
  inputs["dataset"] = dataset_input(a.data, ds);
  const int every = std::max(1, a.log_every);
  auto bundle = rom::offline(ds, config, [&](const std::string &stage, const autoenc::EpochRecord &r) {
    if (r.epoch % every == 0 || r.epoch == 1)
    {
      log << stage << " epoch " << r.epoch << " train " << r.train_loss;
      if (std::isfinite(r.validation_loss))
      {
        log << " validation " << r.validation_loss;
      }
      log << "\n";
    }
  });
  bundle.dataset_fingerprint = io::dataset_fingerprint(ds);
  io::save_bundle(bundle, a.out);
  write_resolved(a.out, "offline", io::to_json(config), inputs);
  for (const auto &w : bundle.report.warnings)
  {
    log << "warning: " << w << "\n";
  }
  out << io::bundle_fingerprint(a.out) << "\n";
  return kOk;
}

int cmd_online(const OnlineArgs &a, std::ostream &out, std::ostream &)
{
  if (a.data.empty() == a.sample.empty())
  {
    throw ConfigError("give exactly one of --data and --sample");
  }
  auto bundle = io::load_bundle(a.bundle);
  Json inputs = {{"bundle", bundle_input(a.bundle)}};
  Json settings = Json::object();
  std::vector<fom::Field> fields;
  Json indices = Json::array();
  if (!a.sample.empty())
  {
    // {"domain": {"holes": [...]}, "params": {"phi": ..., "beta": ...}}
    const Json s = read_json_file(a.sample);
    const auto domain = io::domain_from_json(s.at("domain"));
    const auto params = io::equation_params_from_json(s.value("params", Json::object()));
    const auto bitmap = geometry::rasterize(domain, bundle.grid, bundle.grid);
    fields.push_back(rom::online(bundle, rom::parameter_row(bundle.param_schema, domain, params), bitmap));
    inputs["sample"] = {{"path", a.sample}, {"fingerprint", sha256_file(a.sample)}};
  }
  else
  {
    const auto ds = io::read_dataset(a.data);
    inputs["dataset"] = dataset_input(a.data, ds);
    if (ds.grid != bundle.grid)
    {
      throw DimensionMismatch("dataset grid " + std::to_string(ds.grid) + " differs from the bundle grid " +
                              std::to_string(bundle.grid));
    }
    if (a.index)
    {
      if (*a.index >= ds.size())
      {
        throw ConfigError("--index " + std::to_string(*a.index) + " is out of range for " +
                          std::to_string(ds.size()) + " samples");
      }
      fields.push_back(rom::online(bundle, ds.param_row(*a.index), ds.bitmap(*a.index)));
      indices.push_back(*a.index);
      settings["index"] = *a.index;
    }
    else
    {
      fields = rom::online_batch(bundle, ds.params, ds.masks, ds.size());
      for (std::size_t i = 0; i < ds.size(); ++i)
      {
        indices.push_back(i);
      }
    }
  }
  const fs::path dir = a.out;
  write_fields(dir / "fields.f64le", fields);
  io::write_text(dir / "prediction.json", io::dump({{"count", fields.size()},
                                                    {"grid", bundle.grid},
                                                    {"indices", indices},
                                                    {"mode", rom::mode_name(bundle.mode)},
                                                    {"file", "fields.f64le"}}));
  write_resolved(dir, "online", settings, inputs);
  out << fields.size() << " field(s) written to " << (dir / "fields.f64le").string() << "\n";
  return kOk;
}

int cmd_eval(const EvalArgs &a, std::ostream &out, std::ostream &)
{
  auto bundle = io::load_bundle(a.bundle);
  const auto ds = io::read_dataset(a.data);
  Json inputs = {{"bundle", bundle_input(a.bundle)}, {"dataset", dataset_input(a.data, ds)}};
  metrics::EvalOptions opt;
  opt.include_pixel_errors = !a.no_pixel_errors;
  metrics::EvalReport report;
  if (a.predictions.empty())
  {
    report = metrics::evaluate(bundle, ds, opt);
  }
  else
  {
    const fs::path dir = a.predictions;
    const Json meta = read_json_file((dir / "prediction.json").string());
    report = metrics::evaluate_predictions(ds, read_fields(dir / "fields.f64le", ds.size(), ds.grid), opt);
    inputs["predictions"] = {{"path", a.predictions}, {"fingerprint", sha256_file(dir / "fields.f64le")}};
    if (meta.at("count").get<std::size_t>() != ds.size())
    {
      throw DimensionMismatch("prediction count differs from the dataset size");
    }
  }
  report.mode = rom::mode_name(bundle.mode);
  report.bundle_fingerprint = io::bundle_fingerprint(a.bundle);
  report.dataset_fingerprint = io::dataset_fingerprint(ds);
  Json j = io::to_json(report);
  j["training"] = {{"solution_ae_epochs", bundle.config.solution_ae.epochs},
                   {"domain_ae_epochs", bundle.uses_domain_codes() ? Json(bundle.config.domain_ae.epochs) : Json()},
                   {"phi_epochs", bundle.config.mlp.epochs},
                   {"phi_best_epoch", bundle.report.phi.best_epoch}};
  io::write_text(fs::path(a.out) / "report.json", io::dump(j));
  write_resolved(a.out, "eval", {{"pixel_errors", opt.include_pixel_errors}}, inputs);
  out << "mean relative error " << report.summary.mean << " over " << report.errors.size() << " samples\n";
  return kOk;
}

int cmd_gridsearch(const GridArgs &a, std::ostream &out, std::ostream &log)
{
  rom::GridMenus menus;
  Json inputs = Json::object();
  if (!a.menus.empty())
  {
    menus = io::grid_menus_from_json(read_json_file(a.menus));
    inputs["menus"] = {{"path", a.menus}, {"fingerprint", sha256_file(a.menus)}};
  }
  if (a.epochs)
  {
    menus.epochs = *a.epochs;
  }
  auto bundle = io::load_bundle(a.bundle);
  const auto ds = io::read_dataset(a.data);
  inputs["bundle"] = bundle_input(a.bundle);
  inputs["dataset"] = dataset_input(a.data, ds);
  const auto data = rom::phi_training_data(bundle, ds);

  rom::GridSearchOptions opt;
  opt.budget = a.budget;
  opt.seed = a.seed;
  opt.validation_fraction = a.validation_fraction;
  opt.on_candidate = [&](const rom::CandidateResult &c) {
    log << "candidate " << c.index << " lr " << c.config.max_lr << ": "
        << (c.failed ? c.failure : "validation MSE " + std::to_string(c.best_validation_mse)) << "\n";
  };
  const auto result = rom::grid_search(menus, data.features, data.encodings, opt);
  io::write_text(fs::path(a.out) / "grid.json", io::dump(io::to_json(result)));
  write_resolved(a.out, "gridsearch",
                 {{"menus", io::to_json(menus)},
                  {"budget", a.budget},
                  {"seed", a.seed},
                  {"validation_fraction", a.validation_fraction},
                  {"divergence_factor", opt.divergence_factor}},
                 inputs);
  out << result.ranked.size() << " of " << result.space_size << " candidates evaluated\n";
  return kOk;
}

int cmd_sensitivity(const SensitivityArgs &a, std::ostream &out, std::ostream &)
{
  auto bundle = io::load_bundle(a.bundle);
  Json inputs = {{"bundle", bundle_input(a.bundle)}};
  auto base = metrics::sensitivity_base_domain();
  if (!a.spec.empty())
  {
    const Json s = read_json_file(a.spec);
    base.domain = io::domain_from_json(s.at("domain"));
    base.params = io::equation_params_from_json(s.value("params", Json::object()), base.params);
    inputs["spec"] = {{"path", a.spec}, {"fingerprint", sha256_file(a.spec)}};
  }
  fom::FomConfig fc;
  fc.grid_n = bundle.grid;
  fc.linear_solver_tol = a.tol;
  const auto rows = metrics::sensitivity_sweep(bundle, base.domain, base.params, a.ratios, fc);
  io::write_text(fs::path(a.out) / "sensitivity.json",
                 io::dump({{"bundle_fingerprint", io::bundle_fingerprint(a.bundle)},
                           {"domain", io::to_json(base.domain)},
                           {"params", io::to_json(base.params)},
                           {"rows", io::to_json(rows)}}));
  write_resolved(a.out, "sensitivity",
                 {{"ratios", a.ratios}, {"tol", a.tol}, {"domain", io::to_json(base.domain)},
                  {"params", io::to_json(base.params)}},
                 inputs);
  for (const auto &r : rows)
  {
    out << r.ratio << " " << r.error << "\n";
  }
  return kOk;
}

int exit_code(ErrorCategory c)
{
  switch (c)
  {
  case ErrorCategory::Usage:
    return kUsage;
  case ErrorCategory::Data:
    return kData;
  case ErrorCategory::Numerical:
    return kNumerical;
  }
  return kData;
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &log)
{
  CLI::App app{"Reduced order surrogates for advection-diffusion problems on perforated domains", "romforge"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto *g = app.add_subcommand("generate", "Solve the full model on sampled domains and write a dataset");
  g->add_option("--problem", gen.problem, "ellipse or holes")->check(CLI::IsMember({"ellipse", "holes"}));
  g->add_option("--n", gen.n, "Number of samples")->required()->check(CLI::PositiveNumber);
  g->add_option("--grid", gen.grid, "Grid points per side")->check(CLI::Range(4, 4096));
  g->add_option("--seed", gen.seed, "Sample i uses seed + i");
  g->add_option("--tol", gen.tol, "Relative residual tolerance of the linear solver");
  g->add_option("--mu-min", gen.mu_min, "Sample the diffusion coefficient from [mu-min, mu-max]");
  g->add_option("--mu-max", gen.mu_max);
  g->add_option("--out", gen.out, "Output directory")->required();

  OfflineArgs off;
  auto *o = app.add_subcommand("offline", "Train the autoencoders and Phi_S and write a bundle");
  o->add_option("--data", off.data, "Training dataset directory")->required();
  o->add_option("--config", off.config, "JSON configuration file");
  o->add_option("--out", off.out, "Bundle directory")->required();
  o->add_option("--mode", off.mode, "exact_only, exact_plus_learned or learned_only");
  o->add_option("--seed", off.seed, "Seed for all three networks");
  o->add_option("--sol-epochs", off.sol_epochs);
  o->add_option("--dom-epochs", off.dom_epochs);
  o->add_option("--phi-epochs", off.phi_epochs);
  o->add_option("--domain-set-size", off.domain_set_size, "Bitmaps for the domain autoencoder");
  o->add_option("--log-every", off.log_every, "Epochs between progress lines");

  OnlineArgs on;
  auto *n = app.add_subcommand("online", "Predict solution fields with a bundle");
  n->add_option("--bundle", on.bundle)->required();
  n->add_option("--data", on.data, "Dataset directory (all samples, or one with --index)");
  n->add_option("--index", on.index);
  n->add_option("--sample", on.sample, "JSON file with a domain and equation parameters");
  n->add_option("--out", on.out)->required();

  EvalArgs ev;
  auto *e = app.add_subcommand("eval", "Score a bundle on a test dataset");
  e->add_option("--bundle", ev.bundle)->required();
  e->add_option("--data", ev.data)->required();
  e->add_option("--predictions", ev.predictions, "Score saved online output instead of predicting");
  e->add_flag("--no-pixel-errors", ev.no_pixel_errors);
  e->add_option("--out", ev.out)->required();

  GridArgs gr;
  auto *s = app.add_subcommand("gridsearch", "Search Phi_S hyperparameters on a bundle's encodings");
  s->add_option("--bundle", gr.bundle)->required();
  s->add_option("--data", gr.data)->required();
  s->add_option("--menus", gr.menus, "JSON file overriding the menus");
  s->add_option("--budget", gr.budget, "Candidates to train (0 = all)");
  s->add_option("--seed", gr.seed);
  s->add_option("--epochs", gr.epochs);
  s->add_option("--validation-fraction", gr.validation_fraction)->check(CLI::Range(0.0, 0.9));
  s->add_option("--out", gr.out)->required();

  SensitivityArgs se;
  auto *t = app.add_subcommand("sensitivity", "Error under deformation of circular holes into ellipses");
  t->add_option("--bundle", se.bundle)->required();
  t->add_option("--spec", se.spec, "JSON file with the base domain and parameters");
  t->add_option("--ratios", se.ratios)->delimiter(',');
  t->add_option("--tol", se.tol);
  t->add_option("--out", se.out)->required();

  try
  {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty())
    {
      reversed.pop_back();
    }
    app.parse(reversed);
  }
  catch (const CLI::CallForHelp &)
  {
    out << app.help();
    return kOk;
  }
  catch (const CLI::CallForAllHelp &)
  {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  }
  catch (const CLI::ParseError &err)
  {
    log << "error: " << err.what() << "\n";
    return kUsage;
  }

  try
  {
    if (g->parsed())
    {
      return cmd_generate(gen, out, log);
    }
    if (o->parsed())
    {
      return cmd_offline(off, out, log);
    }
    if (n->parsed())
    {
      return cmd_online(on, out, log);
    }
    if (e->parsed())
    {
      return cmd_eval(ev, out, log);
    }
    if (s->parsed())
    {
      return cmd_gridsearch(gr, out, log);
    }
    return cmd_sensitivity(se, out, log);
  }
  catch (const Error &err)
  {
    log << "error: " << err.what() << "\n";
    return exit_code(err.category());
  }
  catch (const nlohmann::json::exception &err)
  {
    log << "error: malformed JSON input: " << err.what() << "\n";
    return kUsage;
  }
  catch (const fs::filesystem_error &err)
  {
    log << "error: " << err.what() << "\n";
    return kData;
  }
}

}  // namespace romforge::cli
