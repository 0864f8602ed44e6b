// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_ROM_ROM_HPP
#define ROMFORGE_ROM_ROM_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "romforge/autoenc/autoencoder.hpp"
#include "romforge/autoenc/standardize.hpp"
#include "romforge/fom/dataset.hpp"
#include "romforge/fom/fom.hpp"
#include "romforge/geometry/geometry.hpp"

namespace romforge::rom
{

/// Which inputs Phi_S sees: the exact parameter vector, the exact vector plus
/// the learned domain code, or equation parameters plus the learned code.
enum class FeatureMode
{
  ExactOnly,
  ExactPlusLearned,
  LearnedOnly
};

const char *mode_name(FeatureMode mode);
FeatureMode parse_mode(const std::string &name);

struct MlpConfig
{
  int hidden_layers = 2;
  int neurons = 256;
  double dropout = 0.0;
  double max_lr = 1e-3;
  int batch = 32;
  int epochs = 1500;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;
};

/// Throws ConfigError for values outside the supported ranges.
void validate(const MlpConfig &config);

/// [Linear, LeakyReLU, Dropout] per hidden layer, then a Linear head.
std::vector<nn::LayerSpec> phi_specs(int in_dim, int out_dim, const MlpConfig &config);

struct PhiReport
{
  std::vector<autoenc::EpochRecord> epochs;
  int best_epoch = 0;
  double best_validation_mse = 0.0;
  /// Validation MSE of always predicting the training-mean encoding.
  double baseline_validation_mse = 0.0;
  std::size_t train_count = 0;
  std::size_t validation_count = 0;
};

struct TrainedPhi
{
  nn::Sequential<float> net;
  PhiReport report;
};

/// Trains Phi_S on standardized features against encodings. The returned
/// network carries the weights of the best validation epoch (the last epoch
/// when there is no validation data). Throws NonFiniteLoss on divergence.
TrainedPhi train_phi(const nn::Tensor<float> &features, const nn::Tensor<float> &encodings,
                     const MlpConfig &config, const nn::Tensor<float> *validation_features = nullptr,
                     const nn::Tensor<float> *validation_encodings = nullptr);

/// Indices of the parameter-vector columns used by a mode. Throws
/// ModeMismatch when an exact mode is requested without geometric columns.
std::vector<std::size_t> parameter_columns(const std::vector<fom::ParamInfo> &schema, FeatureMode mode);

/// Concatenates the selected parameter columns with the domain codes (for
/// learned modes). Unstandardized.
nn::Tensor<float> build_features(std::span<const float> params, std::size_t param_dim,
                                 const std::vector<std::size_t> &columns, const nn::Tensor<float> *domain_codes,
                                 FeatureMode mode);

/// Parameter row for a domain in the layout of `schema`: equation entries
/// come from `params`; geometric entries require a single-ellipse domain.
std::vector<float> parameter_row(const std::vector<fom::ParamInfo> &schema, const geometry::DomainSpec &domain,
                                 const fom::EquationParams &params);

struct OfflineConfig
{
  autoenc::AutoencoderConfig solution_ae = autoenc::default_solution_ae_config();
  autoenc::AutoencoderConfig domain_ae = autoenc::default_domain_ae_config();
  MlpConfig mlp;
  FeatureMode mode = FeatureMode::LearnedOnly;
  /// Bitmaps used for the domain autoencoder: the dataset's own masks,
  /// topped up with synthetic domains of the same problem to this count.
  std::size_t domain_set_size = 0;
  std::uint64_t domain_set_seed = 1000003;
  autoenc::DegeneratePolicy degenerate_policy = autoenc::DegeneratePolicy::PassThrough;
};

struct OfflineReport
{
  autoenc::TrainReport solution_ae;
  autoenc::TrainReport domain_ae;
  PhiReport phi;
  std::size_t domain_set_size = 0;
  /// Held-out pixel accuracy of the domain autoencoder (its validation split).
  double domain_validation_accuracy = 0.0;
  std::vector<std::string> warnings;
};

/// Trained artifacts of the offline phase plus everything needed to replay
/// the online phase and to trace provenance.
struct RomBundle
{
  FeatureMode mode = FeatureMode::LearnedOnly;
  geometry::Problem problem = geometry::Problem::Ellipse;
  int grid = 0;
  std::vector<fom::ParamInfo> param_schema;
  std::vector<std::size_t> param_columns;
  int solution_latent = 0;
  int domain_latent = 0;
  int feature_dim = 0;
  autoenc::StandardizationStats stats;
  nn::Sequential<float> solution_encoder;
  nn::Sequential<float> solution_decoder;
  nn::Sequential<float> domain_encoder;
  nn::Sequential<float> domain_decoder;
  nn::Sequential<float> phi;
  OfflineConfig config;
  OfflineReport report;
  std::string dataset_fingerprint;

  bool uses_domain_codes() const { return mode != FeatureMode::ExactOnly; }
  /// Checks that every component's dimensions agree. Throws DimensionMismatch.
  void check_consistency();
};

using StageCallback = std::function<void(const std::string &stage, const autoenc::EpochRecord &)>;

/// Products of the two autoencoder stages of the offline phase. A stage
/// trained for a learned mode can serve all three modes.
struct AutoencoderStage
{
  autoenc::StandardizationStats stats;  ///< solution statistics only
  autoenc::Autoencoder solution;
  autoenc::TrainReport solution_report;
  nn::Tensor<float> solution_codes;
  bool has_domain = false;
  autoenc::Autoencoder domain;
  autoenc::TrainReport domain_report;
  nn::Tensor<float> domain_codes;
  std::size_t domain_set_size = 0;
  double domain_validation_accuracy = 0.0;
};

/// Trains the solution autoencoder and, unless the mode is exact_only, the
/// domain autoencoder.
AutoencoderStage train_autoencoders(const fom::SnapshotDataset &dataset, const OfflineConfig &config,
                                    const StageCallback &progress = {});

/// Builds features for `config.mode`, trains Phi_S and assembles the bundle.
/// The stage's networks are copied, so one stage can feed several modes.
RomBundle finish_offline(const fom::SnapshotDataset &dataset, const AutoencoderStage &stage,
                         const OfflineConfig &config, const StageCallback &progress = {});

/// The offline phase: standardize masked solutions, train the solution
/// autoencoder, encode, train the domain autoencoder, encode the domains,
/// build and standardize features, train Phi_S.
RomBundle offline(const fom::SnapshotDataset &dataset, const OfflineConfig &config,
                  const StageCallback &progress = {});

/// Masked solutions u * c as an (N, 1, H, W) tensor (unstandardized).
nn::Tensor<float> masked_solutions(const fom::SnapshotDataset &dataset);
/// Dataset masks as an (N, 1, H, W) tensor of zeros and ones.
nn::Tensor<float> mask_tensor(const fom::SnapshotDataset &dataset);

/// Standardized Phi_S inputs for a set of parameter rows and bitmaps.
nn::Tensor<float> bundle_features(RomBundle &bundle, std::span<const float> params, std::size_t count,
                                  const nn::Tensor<float> &masks);

/// The online phase for one sample. `lambda` follows the bundle's parameter
/// schema; throws ModeMismatch on a length mismatch and DimensionMismatch
/// when the bitmap resolution differs from the bundle grid.
fom::Field online(RomBundle &bundle, std::span<const float> lambda, const geometry::CharacteristicBitmap &bitmap);

/// Batched online phase: `params` is count x |schema|, `masks` count x H x W.
std::vector<fom::Field> online_batch(RomBundle &bundle, std::span<const float> params,
                                     std::span<const std::uint8_t> masks, std::size_t count);

/// Solution-encoder targets and standardized features of a dataset, as seen
/// by Phi_S in a bundle's mode; used to re-run Phi_S searches on a trained
/// bundle.
struct PhiData
{
  nn::Tensor<float> features;
  nn::Tensor<float> encodings;
};
PhiData phi_training_data(RomBundle &bundle, const fom::SnapshotDataset &dataset);

}  // namespace romforge::rom

#endif  // ROMFORGE_ROM_ROM_HPP
