// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "romforge/common/error.hpp"
#include "romforge/common/rng.hpp"
#include "romforge/fom/dataset.hpp"
#include "romforge/io/binary.hpp"
#include "romforge/io/bundle_io.hpp"
#include "romforge/metrics/metrics.hpp"
#include "romforge/rom/grid_search.hpp"
#include "romforge/rom/rom.hpp"

using namespace romforge;
using namespace romforge::rom;
using nn::Tensor;

namespace
{

fom::SnapshotDataset small_dataset(geometry::Problem problem, std::size_t n, std::uint64_t seed)
{
  fom::GenerateOptions opt;
  opt.problem = problem;
  opt.n = n;
  opt.grid = 16;
  opt.seed = seed;
  return fom::generate_dataset(opt);
}

OfflineConfig tiny_offline(FeatureMode mode)
{
  OfflineConfig c;
  c.mode = mode;
  c.solution_ae.encoder_channels = {4, 8};
  c.solution_ae.encoder_strides = {1, 2};
  c.solution_ae.latent_dim = 6;
  c.solution_ae.batch = 5;
  c.solution_ae.epochs = 3;
  c.domain_ae.encoder_channels = {4, 4};
  c.domain_ae.encoder_strides = {2, 2};
  c.domain_ae.latent_dim = 5;
  c.domain_ae.batch = 8;
  c.domain_ae.epochs = 3;
  c.domain_set_size = 30;
  c.mlp.hidden_layers = 1;
  c.mlp.neurons = 16;
  c.mlp.batch = 8;
  c.mlp.epochs = 20;
  return c;
}

const fom::SnapshotDataset &ellipse_data()
{
  static const auto ds = small_dataset(geometry::Problem::Ellipse, 24, 100);
  return ds;
}

/// Rows of y = tanh(A x) + small noise, a learnable map for Phi_S checks.
void synthetic_regression(std::size_t n, Tensor<float> &x, Tensor<float> &y, std::uint64_t seed)
{
  Rng rng(seed);
  x = Tensor<float>({n, 3});
  y = Tensor<float>({n, 2});
  for (std::size_t i = 0; i < n; ++i)
  {
    for (std::size_t j = 0; j < 3; ++j)
    {
      x[i * 3 + j] = static_cast<float>(rng.uniform(-1.5, 1.5));
    }
    y[i * 2] = static_cast<float>(std::tanh(x[i * 3] - 0.5 * x[i * 3 + 1]) + 0.01 * rng.uniform(-1, 1));
    y[i * 2 + 1] = static_cast<float>(x[i * 3 + 2] * x[i * 3] + 0.01 * rng.uniform(-1, 1));
  }
}

std::filesystem::path scratch(const std::string &name)
{
  auto p = std::filesystem::temp_directory_path() / ("romforge_test_rom_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("feature columns per mode")
{
  const auto schema = fom::parameter_schema(geometry::Problem::Ellipse, false);
  CHECK(parameter_columns(schema, FeatureMode::ExactOnly).size() == 7);
  CHECK(parameter_columns(schema, FeatureMode::ExactPlusLearned).size() == 7);
  CHECK(parameter_columns(schema, FeatureMode::LearnedOnly) == std::vector<std::size_t>{0, 6});

  const auto holes = fom::parameter_schema(geometry::Problem::Holes, false);
  CHECK(parameter_columns(holes, FeatureMode::LearnedOnly).size() == 2);
  CHECK_THROWS_AS(parameter_columns(holes, FeatureMode::ExactOnly), ModeMismatch);
  CHECK_THROWS_AS(parameter_columns(holes, FeatureMode::ExactPlusLearned), ModeMismatch);

  CHECK(parse_mode("exact_plus_learned") == FeatureMode::ExactPlusLearned);
  CHECK_THROWS_AS(parse_mode("exact"), ConfigError);
}

TEST_CASE("feature matrix is the column selection followed by the codes")
{
  const std::vector<float> params{1, 2, 3, 4, 5, 6};
  const Tensor<float> codes({2, 2}, std::vector<float>{7, 8, 9, 10});
  const auto f = build_features(params, 3, {0, 2}, &codes, FeatureMode::LearnedOnly);
  CHECK(f.shape() == nn::Shape{2, 4});
  CHECK(f.storage() == std::vector<float>{1, 3, 7, 8, 4, 6, 9, 10});
  const auto e = build_features(params, 3, {0, 1, 2}, nullptr, FeatureMode::ExactOnly);
  CHECK(e.storage() == params);
  CHECK_THROWS_AS(build_features(params, 3, {0}, nullptr, FeatureMode::LearnedOnly), DimensionMismatch);
}

TEST_CASE("parameter rows rebuild the dataset's parameter vectors")
{
  const auto &ds = ellipse_data();
  for (std::size_t i = 0; i < 3; ++i)
  {
    const auto row = ds.param_row(i);
    fom::EquationParams eq;
    eq.phi = row[0];
    eq.beta = row[6];
    const auto rebuilt = parameter_row(ds.schema, ds.domains[i], eq);
    REQUIRE(rebuilt.size() == 7);
    for (std::size_t j = 0; j < 7; ++j)
    {
      CHECK(rebuilt[j] == doctest::Approx(row[j]).epsilon(1e-6));
    }
  }
}

TEST_CASE("Phi_S architecture and configuration checks")
{
  MlpConfig c;
  c.hidden_layers = 2;
  c.dropout = 0.1;
  const auto specs = phi_specs(5, 3, c);
  REQUIRE(specs.size() == 7);
  CHECK(std::holds_alternative<nn::LeakyReluSpec>(specs[1]));
  CHECK(std::holds_alternative<nn::DropoutSpec>(specs[2]));
  CHECK(std::get<nn::LinearSpec>(specs.back()).out_features == 3);
  c.dropout = 0.0;
  CHECK(phi_specs(5, 3, c).size() == 5);

  c.hidden_layers = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.hidden_layers = 5;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("trained Phi_S beats the mean predictor and is reproducible")
{
  Tensor<float> x, y;
  synthetic_regression(200, x, y, 4);
  MlpConfig c;
  c.neurons = 64;
  c.epochs = 60;
  c.max_lr = 3e-3;
  c.seed = 8;
  const auto a = train_phi(x, y, c);
  CHECK(a.report.validation_count == 20);
  CHECK(a.report.best_validation_mse < 0.25 * a.report.baseline_validation_mse);
  CHECK(a.report.best_epoch >= 1);
  const auto b = train_phi(x, y, c);
  CHECK(a.report.best_validation_mse == b.report.best_validation_mse);
  CHECK(a.report.best_epoch == b.report.best_epoch);
  CHECK(a.report.epochs[a.report.best_epoch - 1].validation_loss == a.report.best_validation_mse);
}

TEST_CASE("offline feature dimensions per mode")
{
  const auto &ds = ellipse_data();
  auto exact = offline(ds, tiny_offline(FeatureMode::ExactOnly));
  auto both = offline(ds, tiny_offline(FeatureMode::ExactPlusLearned));
  auto learned = offline(ds, tiny_offline(FeatureMode::LearnedOnly));
  CHECK(exact.feature_dim == 7);
  CHECK(both.feature_dim == 12);
  CHECK(learned.feature_dim == 2 + 5);
  CHECK(exact.domain_encoder.empty());
  CHECK(learned.report.domain_set_size == 30);
  CHECK(learned.report.domain_validation_accuracy > 0.0);
  CHECK(learned.report.solution_ae.epochs.size() == 3);
}

TEST_CASE("one autoencoder stage serves every mode exactly like a direct run")
{
  const auto &ds = ellipse_data();
  const auto stage = train_autoencoders(ds, tiny_offline(FeatureMode::LearnedOnly));
  for (auto mode : {FeatureMode::ExactPlusLearned, FeatureMode::LearnedOnly})
  {
    auto shared = finish_offline(ds, stage, tiny_offline(mode));
    auto direct = offline(ds, tiny_offline(mode));
    const auto p = ds.param_row(0);
    CHECK(online(shared, p, ds.bitmap(0)).values == online(direct, p, ds.bitmap(0)).values);
  }
  auto exact_stage = train_autoencoders(ds, tiny_offline(FeatureMode::ExactOnly));
  CHECK_FALSE(exact_stage.has_domain);
  CHECK_THROWS_AS(finish_offline(ds, exact_stage, tiny_offline(FeatureMode::LearnedOnly)), ModeMismatch);
}

TEST_CASE("online equals the stepwise composition and batches agree with single calls")
{
  const auto &ds = ellipse_data();
  auto b = offline(ds, tiny_offline(FeatureMode::ExactPlusLearned));
  const std::size_t g = 16;
  for (std::size_t i = 0; i < 4; ++i)
  {
    const auto lambda = ds.param_row(i);
    const auto bitmap = ds.bitmap(i);

    Tensor<float> mask({1, 1, g, g});
    std::copy(bitmap.pixels.begin(), bitmap.pixels.end(), mask.data());
    const Tensor<float> d = b.domain_encoder.forward(mask, false);
    Tensor<float> f({1, 12});
    for (std::size_t j = 0; j < 7; ++j)
    {
      f[j] = lambda[j];
    }
    for (std::size_t j = 0; j < 5; ++j)
    {
      f[7 + j] = d[j];
    }
    autoenc::standardize_features(f, b.stats);
    const Tensor<float> u = b.solution_decoder.forward(b.phi.forward(f, false), false);

    const auto field = online(b, lambda, bitmap);
    REQUIRE(field.size() == g * g);
    for (std::size_t k = 0; k < field.size(); ++k)
    {
      CHECK(field.values[k] == autoenc::destandardize_solution(u[k], b.stats));
    }
  }

  const std::size_t m = 5;
  const auto batch = online_batch(b, std::span<const float>(ds.params.data(), m * 7),
                                  std::span<const std::uint8_t>(ds.masks.data(), m * g * g), m);
  for (std::size_t i = 0; i < m; ++i)
  {
    CHECK(batch[i].values == online(b, ds.param_row(i), ds.bitmap(i)).values);
  }

  CHECK_THROWS_AS(online(b, std::vector<float>(6, 0.f), ds.bitmap(0)), ModeMismatch);
  const auto coarse = geometry::rasterize(ds.domains[0], 8, 8);
  CHECK_THROWS_AS(online(b, ds.param_row(0), coarse), DimensionMismatch);
}

TEST_CASE("bundle persistence round-trips bitwise")
{
  const auto &ds = ellipse_data();
  for (auto mode : {FeatureMode::ExactOnly, FeatureMode::LearnedOnly})
  {
    auto b = offline(ds, tiny_offline(mode));
    const auto dir = scratch(mode_name(mode));
    io::save_bundle(b, dir);
    auto loaded = io::load_bundle(dir);
    CHECK(loaded.mode == mode);
    CHECK(loaded.feature_dim == b.feature_dim);
    CHECK(loaded.stats.feature_std == b.stats.feature_std);
    CHECK(loaded.report.phi.best_epoch == b.report.phi.best_epoch);
    for (std::size_t i = 0; i < 3; ++i)
    {
      CHECK(online(loaded, ds.param_row(i), ds.bitmap(i)).values == online(b, ds.param_row(i), ds.bitmap(i)).values);
    }
    const auto again = scratch(std::string(mode_name(mode)) + "_again");
    io::save_bundle(loaded, again);
    CHECK(io::read_file(again / "bundle.json") == io::read_file(dir / "bundle.json"));
    CHECK(io::bundle_fingerprint(again) == io::bundle_fingerprint(dir));

    // A corrupted checkpoint is caught by its recorded hash.
    auto bytes = io::read_file(dir / "phi.romf");
    bytes[bytes.size() / 2] ^= 0x01;
    io::write_file(dir / "phi.romf", bytes);
    CHECK_THROWS_AS(io::load_bundle(dir), FormatError);
    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(again);
  }
}

TEST_CASE("holes datasets train in learned_only mode")
{
  const auto ds = small_dataset(geometry::Problem::Holes, 16, 300);
  CHECK_THROWS_AS(offline(ds, tiny_offline(FeatureMode::ExactOnly)), ModeMismatch);
  auto b = offline(ds, tiny_offline(FeatureMode::LearnedOnly));
  CHECK(b.feature_dim == 2 + 5);
  const auto r = metrics::evaluate(b, ds);
  CHECK(std::isfinite(r.summary.mean));
}

TEST_CASE("sensitivity sweep: ratio 1 is the undeformed domain")
{
  const auto ds = small_dataset(geometry::Problem::Holes, 16, 300);
  auto b = offline(ds, tiny_offline(FeatureMode::LearnedOnly));
  const auto base = metrics::sensitivity_base_domain();
  fom::FomConfig fc;
  fc.grid_n = 16;
  const auto rows = metrics::sensitivity_sweep(b, base.domain, base.params, {1.0, 0.95, 0.9, 0.8}, fc);
  REQUIRE(rows.size() == 4);
  const auto u = fom::solve_benchmark(base.domain, base.params, fc);
  const auto bitmap = geometry::rasterize(base.domain, 16, 16);
  const auto uh = online(b, parameter_row(b.param_schema, base.domain, base.params), bitmap);
  CHECK(rows[0].error == metrics::relative_error(u, uh, bitmap));
  CHECK(rows[3].reference == 0.0166);
  for (const auto &r : rows)
  {
    CHECK(std::isfinite(r.error));
  }
  fc.grid_n = 32;
  CHECK_THROWS_AS(metrics::sensitivity_sweep(b, base.domain, base.params, {1.0}, fc), DimensionMismatch);
}

TEST_CASE("full menus enumerate 4200 candidates")
{
  const GridMenus menus;
  const auto all = enumerate_candidates(menus);
  CHECK(all.size() == 4200);
  CHECK(all.front().hidden_layers == 1);
  CHECK(all.front().batch == 8);
  CHECK(all[1].batch == 16);
  CHECK(all.back().hidden_layers == 4);
  CHECK(all.back().neurons == 2048);
  CHECK(all.back().max_lr == 1e-2);
}

TEST_CASE("candidate subsets are seeded, sorted and without repeats")
{
  const auto a = select_candidates(4200, 4, 17);
  CHECK(a == select_candidates(4200, 4, 17));
  CHECK(a.size() == 4);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
  CHECK(a != select_candidates(4200, 4, 18));
  CHECK(select_candidates(10, 0, 1).size() == 10);
  CHECK(select_candidates(10, 50, 1).size() == 10);
}

TEST_CASE("grid search prefers the sane learning rate and flags divergence")
{
  Tensor<float> x, y;
  synthetic_regression(120, x, y, 6);
  GridMenus menus;
  menus.hidden_layers = {1};
  menus.neurons = {32};
  menus.dropout = {0.0};
  menus.max_lr = {1e-3, 1e3};
  menus.batch = {16};
  menus.epochs = 30;
  std::vector<std::size_t> seen;
  GridSearchOptions opt;
  opt.seed = 2;
  opt.on_candidate = [&](const CandidateResult &c) { seen.push_back(c.index); };
  const auto r = grid_search(menus, x, y, opt);
  CHECK(r.space_size == 2);
  REQUIRE(r.ranked.size() == 2);
  CHECK(seen == std::vector<std::size_t>{0, 1});
  CHECK(r.ranked[0].config.max_lr == 1e-3);
  CHECK_FALSE(r.ranked[0].failed);
  CHECK(r.ranked[1].failed);
  CHECK(r.ranked[1].failure.rfind("diverged", 0) == 0);

  // A learning rate too small to move the weights is ranked, not flagged.
  menus.max_lr = {1e-9, 1e-2};
  const auto slow = grid_search(menus, x, y, opt);
  CHECK(slow.ranked[0].config.max_lr == 1e-2);
  CHECK_FALSE(slow.ranked[1].failed);
  CHECK(slow.ranked[1].best_validation_mse > slow.ranked[0].best_validation_mse);

  const auto again = grid_search(menus, x, y, opt);
  CHECK(again.ranked[0].best_validation_mse == slow.ranked[0].best_validation_mse);
}

TEST_CASE("grid search rejects empty menus and mismatched data")
{
  Tensor<float> x, y;
  synthetic_regression(40, x, y, 1);
  GridMenus menus;
  menus.batch.clear();
  CHECK_THROWS_AS(grid_search(menus, x, y), ConfigError);
  GridMenus one;
  one.hidden_layers = {1};
  one.neurons = {8};
  one.dropout = {0.0};
  one.max_lr = {1e-3};
  one.batch = {8};
  one.epochs = 1;
  CHECK_THROWS_AS(grid_search(one, x, y.slice_rows(0, 10)), DimensionMismatch);
}
