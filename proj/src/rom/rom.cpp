// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "romforge/rom/rom.hpp"

#include <cmath>
#include <numeric>

#include "romforge/common/error.hpp"
#include "romforge/common/rng.hpp"
#include "romforge/nn/loss.hpp"
#include "romforge/nn/optim.hpp"

namespace romforge::rom
{

using nn::Tensor;

const char *mode_name(FeatureMode mode)
{
  switch (mode)
  {
  case FeatureMode::ExactOnly:
    return "exact_only";
  case FeatureMode::ExactPlusLearned:
    return "exact_plus_learned";
  case FeatureMode::LearnedOnly:
    return "learned_only";
  }
  return "unknown";
}

FeatureMode parse_mode(const std::string &name)
{
  for (FeatureMode m : {FeatureMode::ExactOnly, FeatureMode::ExactPlusLearned, FeatureMode::LearnedOnly})
  {
    if (name == mode_name(m))
    {
      return m;
    }
  }
  throw ConfigError("unknown feature mode '" + name + "' (expected exact_only, exact_plus_learned or learned_only)");
}

void validate(const MlpConfig &c)
{
  if (c.hidden_layers < 1 || c.hidden_layers > 4)
  {
    throw ConfigError("Phi_S needs 1 to 4 hidden layers, got " + std::to_string(c.hidden_layers));
  }
  if (c.neurons < 1)
  {
    throw ConfigError("Phi_S neurons per layer must be positive");
  }
  if (!(c.dropout >= 0.0 && c.dropout < 1.0))
  {
    throw ConfigError("Phi_S dropout must lie in [0, 1)");
  }
  if (!(c.max_lr > 0.0) || c.batch < 1 || c.epochs < 1)
  {
    throw ConfigError("Phi_S training needs max_lr > 0, batch >= 1 and epochs >= 1");
  }
}

std::vector<nn::LayerSpec> phi_specs(int in_dim, int out_dim, const MlpConfig &config)
{
  validate(config);
  std::vector<nn::LayerSpec> specs;
  int width = in_dim;
  for (int l = 0; l < config.hidden_layers; ++l)
  {
    specs.push_back(nn::LinearSpec{width, config.neurons});
    specs.push_back(nn::LeakyReluSpec{});
    if (config.dropout > 0.0)
    {
      specs.push_back(nn::DropoutSpec{config.dropout});
    }
    width = config.neurons;
  }
  specs.push_back(nn::LinearSpec{width, out_dim});
  return specs;
}

namespace
{

double eval_mse(nn::Sequential<float> &net, const Tensor<float> &x, const Tensor<float> &y)
{
  return nn::mse_loss(autoenc::forward_batched(net, x, 256), y).loss;
}

double mean_predictor_mse(const Tensor<float> &train, const Tensor<float> &target)
{
  const std::size_t n = train.dim(0), m = train.dim(1);
  std::vector<double> mean(m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
  {
    for (std::size_t j = 0; j < m; ++j)
    {
      mean[j] += train[i * m + j];
    }
  }
  for (auto &v : mean)
  {
    v /= static_cast<double>(n);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < target.dim(0); ++i)
  {
    for (std::size_t j = 0; j < m; ++j)
    {
      const double d = target[i * m + j] - mean[j];
      total += d * d;
    }
  }
  return total / static_cast<double>(target.size());
}

void require_rows(const Tensor<float> &a, const Tensor<float> &b, const char *what)
{
  if (a.rank() != 2 || b.rank() != 2 || a.dim(0) != b.dim(0) || a.dim(0) == 0)
  {
    throw DimensionMismatch(std::string(what) + ": features " + nn::shape_string(a.shape()) + " and targets " +
                            nn::shape_string(b.shape()) + " must be non-empty matrices with equal row counts");
  }
}

}  // namespace

TrainedPhi train_phi(const Tensor<float> &features, const Tensor<float> &encodings, const MlpConfig &config,
                     const Tensor<float> *validation_features, const Tensor<float> *validation_encodings)
{
  validate(config);
  require_rows(features, encodings, "Phi_S training data");
  Tensor<float> xtr, ytr, xva, yva;
  if (validation_features != nullptr && validation_encodings != nullptr)
  {
    require_rows(*validation_features, *validation_encodings, "Phi_S validation data");
    if (validation_features->dim(1) != features.dim(1) || validation_encodings->dim(1) != encodings.dim(1))
    {
      throw DimensionMismatch("Phi_S validation columns differ from the training columns");
    }
    xtr = features;
    ytr = encodings;
    xva = *validation_features;
    yva = *validation_encodings;
  }
  else
  {
    const auto [tr, va] = autoenc::split_indices(features.dim(0), config.validation_fraction,
                                                 derive_seed(config.seed, 3));
    xtr = nn::gather_rows(features, std::span<const std::size_t>(tr));
    ytr = nn::gather_rows(encodings, std::span<const std::size_t>(tr));
    if (!va.empty())
    {
      xva = nn::gather_rows(features, std::span<const std::size_t>(va));
      yva = nn::gather_rows(encodings, std::span<const std::size_t>(va));
    }
  }
  const bool has_val = !xva.empty();
  const std::size_t n = xtr.dim(0);

  TrainedPhi out;
  out.net = nn::Sequential<float>(phi_specs(static_cast<int>(features.dim(1)), static_cast<int>(encodings.dim(1)), config),
                                  derive_seed(config.seed, 1));
  PhiReport &rep = out.report;
  rep.train_count = n;
  rep.validation_count = has_val ? xva.dim(0) : 0;
  rep.baseline_validation_mse = has_val ? mean_predictor_mse(ytr, yva) : mean_predictor_mse(ytr, ytr);
  rep.best_validation_mse = INFINITY;

  const auto ranges = autoenc::batch_ranges(n, static_cast<std::size_t>(config.batch));
  nn::OneCycleSchedule schedule;
  schedule.max_lr = config.max_lr;
  schedule.total_steps = static_cast<long>(ranges.size()) * config.epochs;
  nn::AdamState adam;
  auto params = out.net.parameters();
  Rng shuffle_rng(derive_seed(config.seed, 4));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<Tensor<float>> best_state = out.net.state_snapshot();

  long step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch)
  {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double total = 0.0;
    for (const auto &[begin, end] : ranges)
    {
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      const auto r = nn::mse_loss(out.net.forward(nn::gather_rows(xtr, idx), true), nn::gather_rows(ytr, idx));
      if (!std::isfinite(r.loss))
      {
        throw NonFiniteLoss("Phi_S training loss became non-finite", epoch);
      }
      total += r.loss * static_cast<double>(end - begin);
      out.net.backward(r.grad, false);
      nn::adam_step<float>(params, adam, nn::one_cycle_lr(schedule, step));
      ++step;
    }
    autoenc::EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = total / static_cast<double>(n);
    rec.validation_loss = has_val ? eval_mse(out.net, xva, yva) : std::nan("");
    if (has_val && !std::isfinite(rec.validation_loss))
    {
      throw NonFiniteLoss("Phi_S validation loss became non-finite", epoch);
    }
    rep.epochs.push_back(rec);
    const double score = has_val ? rec.validation_loss : rec.train_loss;
    if (!has_val || score < rep.best_validation_mse)
    {
      rep.best_validation_mse = score;
      rep.best_epoch = epoch;
      if (has_val)
      {
        best_state = out.net.state_snapshot();
      }
    }
  }
  if (has_val)
  {
    out.net.load_state_snapshot(best_state);
  }
  return out;
}

std::vector<std::size_t> parameter_columns(const std::vector<fom::ParamInfo> &schema, FeatureMode mode)
{
  std::vector<std::size_t> cols;
  bool has_geometry = false;
  for (std::size_t j = 0; j < schema.size(); ++j)
  {
    const bool geometric = schema[j].role == fom::ParamRole::Geometry;
    has_geometry = has_geometry || geometric;
    if (mode != FeatureMode::LearnedOnly || !geometric)
    {
      cols.push_back(j);
    }
  }
  if (mode != FeatureMode::LearnedOnly && !has_geometry)
  {
    throw ModeMismatch(std::string("mode ") + mode_name(mode) +
                       " needs exact geometric parameters, which this dataset does not carry");
  }
  return cols;
}

Tensor<float> build_features(std::span<const float> params, std::size_t param_dim,
                             const std::vector<std::size_t> &columns, const Tensor<float> *domain_codes,
                             FeatureMode mode)
{
  if (param_dim == 0 || params.size() % param_dim != 0)
  {
    throw DimensionMismatch("parameter block is not a whole number of rows");
  }
  const std::size_t n = params.size() / param_dim;
  const bool learned = mode != FeatureMode::ExactOnly;
  std::size_t code_dim = 0;
  if (learned)
  {
    if (domain_codes == nullptr || domain_codes->rank() != 2 || domain_codes->dim(0) != n)
    {
      throw DimensionMismatch("learned feature modes need one domain code per parameter row");
    }
    code_dim = domain_codes->dim(1);
  }
  const std::size_t width = columns.size() + code_dim;
  Tensor<float> f({n, width});
  for (std::size_t i = 0; i < n; ++i)
  {
    float *row = f.data() + i * width;
    for (std::size_t c = 0; c < columns.size(); ++c)
    {
      row[c] = params[i * param_dim + columns[c]];
    }
    for (std::size_t c = 0; c < code_dim; ++c)
    {
      row[columns.size() + c] = (*domain_codes)[i * code_dim + c];
    }
  }
  return f;
}

std::vector<float> parameter_row(const std::vector<fom::ParamInfo> &schema, const geometry::DomainSpec &domain,
                                 const fom::EquationParams &params)
{
  std::vector<float> row;
  for (const auto &p : schema)
  {
    if (p.name == "phi")
    {
      row.push_back(static_cast<float>(params.phi));
    }
    else if (p.name == "beta")
    {
      row.push_back(static_cast<float>(params.beta));
    }
    else if (p.name == "mu")
    {
      row.push_back(static_cast<float>(params.mu));
    }
    else
    {
      if (domain.holes.size() != 1)
      {
        throw ModeMismatch("parameter '" + p.name + "' needs a single-hole domain");
      }
      const auto &h = domain.holes.front();
      const double v = p.name == "x0"      ? h.x0
                       : p.name == "y0"    ? h.y0
                       : p.name == "alpha" ? h.angle
                       : p.name == "a"     ? h.a
                       : p.name == "b"     ? h.b
                                           : NAN;
      if (std::isnan(v))
      {
        throw ModeMismatch("unknown parameter '" + p.name + "'");
      }
      row.push_back(static_cast<float>(v));
    }
  }
  return row;
}

Tensor<float> masked_solutions(const fom::SnapshotDataset &ds)
{
  const std::size_t g = static_cast<std::size_t>(ds.grid);
  Tensor<float> u({ds.size(), 1, g, g}, ds.solutions);
  for (std::size_t i = 0; i < u.size(); ++i)
  {
    u[i] *= static_cast<float>(ds.masks[i]);
  }
  return u;
}

Tensor<float> mask_tensor(const fom::SnapshotDataset &ds)
{
  const std::size_t g = static_cast<std::size_t>(ds.grid);
  Tensor<float> m({ds.size(), 1, g, g});
  std::copy(ds.masks.begin(), ds.masks.end(), m.data());
  return m;
}

namespace
{

autoenc::EpochCallback stage_callback(const StageCallback &progress, const std::string &stage)
{
  if (!progress)
  {
    return {};
  }
  return [progress, stage](const autoenc::EpochRecord &r) { progress(stage, r); };
}

}  // namespace

void RomBundle::check_consistency()
{
  auto fail = [](const std::string &what) { throw DimensionMismatch("bundle inconsistent: " + what); };
  const std::size_t g = static_cast<std::size_t>(grid);
  try
  {
    if (solution_decoder.output_shape({1, static_cast<std::size_t>(solution_latent)}) != nn::Shape{1, 1, g, g})
    {
      fail("solution decoder does not produce a " + std::to_string(grid) + "x" + std::to_string(grid) + " field");
    }
    if (phi.output_shape({1, static_cast<std::size_t>(feature_dim)}) !=
        nn::Shape{1, static_cast<std::size_t>(solution_latent)})
    {
      fail("Phi_S output width differs from the solution latent size");
    }
    if (uses_domain_codes() &&
        domain_encoder.output_shape({1, 1, g, g}) != nn::Shape{1, static_cast<std::size_t>(domain_latent)})
    {
      fail("domain encoder output width differs from the domain latent size");
    }
  }
  catch (const ShapeMismatch &e)
  {
    fail(e.what());
  }
  const std::size_t expected = param_columns.size() + (uses_domain_codes() ? static_cast<std::size_t>(domain_latent) : 0);
  if (expected != static_cast<std::size_t>(feature_dim) || stats.feature_mean.size() != expected ||
      stats.feature_std.size() != expected)
  {
    fail("feature width " + std::to_string(feature_dim) + " does not match columns, codes and statistics");
  }
  for (std::size_t c : param_columns)
  {
    if (c >= param_schema.size())
    {
      fail("parameter column out of range");
    }
  }
}

AutoencoderStage train_autoencoders(const fom::SnapshotDataset &ds, const OfflineConfig &config,
                                    const StageCallback &progress)
{
  if (ds.size() < 2)
  {
    throw ConfigError("the offline phase needs at least two samples");
  }
  AutoencoderStage st;

  // Solution autoencoder on standardized masked snapshots.
  Tensor<float> u = masked_solutions(ds);
  autoenc::compute_solution_stats(u.values(), st.stats);
  autoenc::standardize_solutions(u.values(), st.stats);
  st.solution = autoenc::build_solution_ae(config.solution_ae, ds.grid);
  st.solution_report = autoenc::train_autoencoder(st.solution, u, autoenc::ReconstructionLoss::Mse,
                                                  config.solution_ae, nullptr, stage_callback(progress, "solution_ae"));
  st.solution_codes = autoenc::encode_dataset(st.solution.encoder, u);

  // Domain autoencoder on the dataset masks plus synthetic domains.
  if (config.mode != FeatureMode::ExactOnly)
  {
    const Tensor<float> masks = mask_tensor(ds);
    std::vector<float> pool(masks.values().begin(), masks.values().end());
    const std::size_t total = std::max(config.domain_set_size, ds.size());
    if (total > ds.size())
    {
      for (const auto &bm : fom::sample_bitmaps(ds.problem, total - ds.size(), ds.grid, config.domain_set_seed))
      {
        pool.insert(pool.end(), bm.pixels.begin(), bm.pixels.end());
      }
    }
    const std::size_t g = static_cast<std::size_t>(ds.grid);
    const Tensor<float> domain_set({total, 1, g, g}, std::move(pool));
    const auto [tr, va] = autoenc::split_indices(total, config.domain_ae.validation_fraction,
                                                 derive_seed(config.domain_ae.seed, 3));
    const Tensor<float> dtrain = nn::gather_rows(domain_set, std::span<const std::size_t>(tr));
    const Tensor<float> dval = nn::gather_rows(domain_set, std::span<const std::size_t>(va));
    st.domain = autoenc::build_domain_ae(config.domain_ae, ds.grid);
    st.domain_report = autoenc::train_autoencoder(st.domain, dtrain, autoenc::ReconstructionLoss::Bce,
                                                  config.domain_ae, va.empty() ? nullptr : &dval,
                                                  stage_callback(progress, "domain_ae"));
    st.domain_set_size = total;
    if (!va.empty())
    {
      const Tensor<float> probs =
          autoenc::forward_batched(st.domain.decoder, autoenc::encode_dataset(st.domain.encoder, dval));
      st.domain_validation_accuracy = autoenc::pixel_accuracy(probs, dval);
    }
    st.domain_codes = autoenc::encode_dataset(st.domain.encoder, masks);
    st.has_domain = true;
  }
  return st;
}

RomBundle finish_offline(const fom::SnapshotDataset &ds, const AutoencoderStage &st, const OfflineConfig &config,
                         const StageCallback &progress)
{
  validate(config.mlp);
  RomBundle b;
  b.mode = config.mode;
  b.problem = ds.problem;
  b.grid = ds.grid;
  b.param_schema = ds.schema;
  b.param_columns = parameter_columns(ds.schema, config.mode);
  b.config = config;
  b.stats = st.stats;
  b.stats.feature_mean.clear();
  b.stats.feature_std.clear();
  b.stats.degenerate_features.clear();
  b.solution_latent = st.solution.latent_dim;
  b.report.solution_ae = st.solution_report;
  if (st.solution_codes.empty() || st.solution_codes.dim(0) != ds.size())
  {
    throw DimensionMismatch("autoencoder stage was trained on a different dataset");
  }
  if (b.uses_domain_codes())
  {
    if (!st.has_domain)
    {
      throw ModeMismatch(std::string("mode ") + mode_name(config.mode) + " needs a trained domain autoencoder");
    }
    b.report.domain_ae = st.domain_report;
    b.report.domain_set_size = st.domain_set_size;
    b.report.domain_validation_accuracy = st.domain_validation_accuracy;
    b.domain_latent = st.domain.latent_dim;
    b.domain_encoder = st.domain.encoder.clone();
    b.domain_decoder = st.domain.decoder.clone();
  }

  // Features and Phi_S.
  Tensor<float> f = build_features(ds.params, ds.param_dim(), b.param_columns,
                                   b.uses_domain_codes() ? &st.domain_codes : nullptr, config.mode);
  autoenc::compute_feature_stats(f, b.stats, config.degenerate_policy);
  for (std::size_t j : b.stats.degenerate_features)
  {
    b.report.warnings.push_back("feature column " + std::to_string(j) + " is constant; its deviation was set to 1");
  }
  autoenc::standardize_features(f, b.stats);
  b.feature_dim = static_cast<int>(f.dim(1));
  auto phi = train_phi(f, st.solution_codes, config.mlp);
  if (progress)
  {
    for (const auto &r : phi.report.epochs)
    {
      progress("phi", r);
    }
  }
  b.report.phi = phi.report;
  b.phi = std::move(phi.net);
  b.solution_encoder = st.solution.encoder.clone();
  b.solution_decoder = st.solution.decoder.clone();
  b.check_consistency();
  return b;
}

RomBundle offline(const fom::SnapshotDataset &ds, const OfflineConfig &config, const StageCallback &progress)
{
  validate(config.mlp);
  (void)parameter_columns(ds.schema, config.mode);
  return finish_offline(ds, train_autoencoders(ds, config, progress), config, progress);
}

Tensor<float> bundle_features(RomBundle &bundle, std::span<const float> params, std::size_t count,
                              const Tensor<float> &masks)
{
  const std::size_t k = bundle.param_schema.size();
  if (params.size() != count * k)
  {
    throw ModeMismatch("parameter rows have " + std::to_string(count ? params.size() / count : 0) +
                       " entries but the bundle expects " + std::to_string(k));
  }
  Tensor<float> codes;
  if (bundle.uses_domain_codes())
  {
    codes = autoenc::encode_dataset(bundle.domain_encoder, masks);
  }
  Tensor<float> f =
      build_features(params, k, bundle.param_columns, bundle.uses_domain_codes() ? &codes : nullptr, bundle.mode);
  autoenc::standardize_features(f, bundle.stats);
  return f;
}

namespace
{

std::vector<fom::Field> predict(RomBundle &bundle, std::span<const float> params, const Tensor<float> &masks,
                                std::size_t count)
{
  const Tensor<float> f = bundle_features(bundle, params, count, masks);
  const Tensor<float> latent = autoenc::forward_batched(bundle.phi, f);
  const Tensor<float> u = autoenc::forward_batched(bundle.solution_decoder, latent);
  const std::size_t px = static_cast<std::size_t>(bundle.grid) * bundle.grid;
  std::vector<fom::Field> out(count);
  for (std::size_t i = 0; i < count; ++i)
  {
    out[i].height = bundle.grid;
    out[i].width = bundle.grid;
    out[i].values.resize(px);
    for (std::size_t p = 0; p < px; ++p)
    {
      out[i].values[p] = autoenc::destandardize_solution(u[i * px + p], bundle.stats);
    }
  }
  return out;
}

}  // namespace

fom::Field online(RomBundle &bundle, std::span<const float> lambda, const geometry::CharacteristicBitmap &bitmap)
{
  if (bitmap.height != bundle.grid || bitmap.width != bundle.grid)
  {
    throw DimensionMismatch("bitmap is " + std::to_string(bitmap.height) + "x" + std::to_string(bitmap.width) +
                            " but the bundle expects " + std::to_string(bundle.grid) + "x" +
                            std::to_string(bundle.grid));
  }
  return online_batch(bundle, lambda, bitmap.pixels, 1).front();
}

std::vector<fom::Field> online_batch(RomBundle &bundle, std::span<const float> params,
                                     std::span<const std::uint8_t> masks, std::size_t count)
{
  const std::size_t g = static_cast<std::size_t>(bundle.grid);
  if (masks.size() != count * g * g)
  {
    throw DimensionMismatch("mask block does not hold " + std::to_string(count) + " bitmaps of " +
                            std::to_string(g) + "x" + std::to_string(g));
  }
  const std::size_t k = bundle.param_schema.size();
  if (params.size() != count * k)
  {
    throw ModeMismatch("parameter rows have " + std::to_string(count ? params.size() / count : 0) +
                       " entries but the bundle expects " + std::to_string(k));
  }
  // One sample at a time: the matrix kernels round differently for
  // different batch sizes, and a prediction must not depend on its
  // neighbours in the batch.
  std::vector<fom::Field> out;
  out.reserve(count);
  Tensor<float> m({1, 1, g, g});
  for (std::size_t i = 0; i < count; ++i)
  {
    std::copy(masks.begin() + static_cast<std::ptrdiff_t>(i * g * g),
              masks.begin() + static_cast<std::ptrdiff_t>((i + 1) * g * g), m.data());
    out.push_back(std::move(predict(bundle, params.subspan(i * k, k), m, 1).front()));
  }
  return out;
}

PhiData phi_training_data(RomBundle &bundle, const fom::SnapshotDataset &ds)
{
  if (ds.grid != bundle.grid)
  {
    throw DimensionMismatch("dataset grid differs from the bundle grid");
  }
  if (ds.schema != bundle.param_schema)
  {
    throw ModeMismatch("dataset parameter schema differs from the bundle schema");
  }
  Tensor<float> u = masked_solutions(ds);
  autoenc::standardize_solutions(u.values(), bundle.stats);
  PhiData out;
  out.encodings = autoenc::encode_dataset(bundle.solution_encoder, u);
  out.features = bundle_features(bundle, ds.params, ds.size(), mask_tensor(ds));
  return out;
}

}  // namespace romforge::rom
