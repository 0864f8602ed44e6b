// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_AUTOENC_AUTOENCODER_HPP
#define ROMFORGE_AUTOENC_AUTOENCODER_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "romforge/nn/sequential.hpp"

namespace romforge::autoenc
{

/// Convolutional autoencoder hyperparameters. Strides are 1 or 2; every
/// stride-2 encoder layer is mirrored by an Upsample2x in the decoder.
struct AutoencoderConfig
{
  std::vector<int> encoder_channels;
  std::vector<int> encoder_strides;
  int latent_dim = 20;
  int kernel = 5;
  int batch = 50;
  double max_lr = 1e-3;
  int epochs = 100;
  std::uint64_t seed = 0;
  /// Share of the training set held out when no validation set is given.
  double validation_fraction = 0.1;
};

AutoencoderConfig default_solution_ae_config();
AutoencoderConfig default_domain_ae_config();

enum class ReconstructionLoss
{
  Mse,
  Bce
};

struct Autoencoder
{
  nn::Sequential<float> encoder;
  nn::Sequential<float> decoder;
  int input_hw = 0;
  int latent_dim = 0;
  bool sigmoid_head = false;
};

/// Encoder: [Conv, BatchNorm, LeakyReLU] per channel entry, Flatten, Linear.
/// Decoder: Linear, BatchNorm, LeakyReLU, Reshape, then the conv stack in
/// reverse with a plain final conv (linear head).
Autoencoder build_solution_ae(const AutoencoderConfig &config, int input_hw);

/// Same construction with a Sigmoid on the final conv.
Autoencoder build_domain_ae(const AutoencoderConfig &config, int input_hw);

/// Resolution entering each decoder conv block, before any upsampling.
std::vector<std::size_t> decoder_block_resolutions(const Autoencoder &ae);
/// Resolution leaving each encoder conv block.
std::vector<std::size_t> encoder_block_resolutions(const Autoencoder &ae);

struct EpochRecord
{
  int epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;  ///< NaN when there is no validation data
};

struct TrainReport
{
  std::vector<EpochRecord> epochs;
  std::size_t train_count = 0;
  std::size_t validation_count = 0;
  long steps = 0;
  double final_train_loss() const { return epochs.empty() ? 0.0 : epochs.back().train_loss; }
  double final_validation_loss() const { return epochs.empty() ? 0.0 : epochs.back().validation_loss; }
};

using EpochCallback = std::function<void(const EpochRecord &)>;

/// Mini-batch Adam with a one-cycle schedule. `data` is (N, 1, H, W). For
/// BCE the sigmoid head is bypassed and the fused logit loss is used.
/// Throws NonFiniteLoss with the epoch on divergence.
TrainReport train_autoencoder(Autoencoder &ae, const nn::Tensor<float> &data, ReconstructionLoss loss,
                              const AutoencoderConfig &config,
                              const nn::Tensor<float> *validation = nullptr,
                              const EpochCallback &on_epoch = {});

/// Row i is the encoding of items[i], computed in evaluation mode.
nn::Tensor<float> encode_dataset(nn::Sequential<float> &encoder, const nn::Tensor<float> &items);

/// Evaluation-mode forward in fixed-size chunks.
nn::Tensor<float> forward_batched(nn::Sequential<float> &net, const nn::Tensor<float> &input,
                                  std::size_t chunk = 64);

/// Share of pixels where the thresholded probability matches the target.
double pixel_accuracy(const nn::Tensor<float> &probabilities, const nn::Tensor<float> &targets,
                      double threshold = 0.5);

/// Splits indices [0, n) into (train, validation) with a seeded shuffle.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double fraction,
                                                                            std::uint64_t seed);

/// Batch boundaries over n items; a trailing batch of one is merged into the
/// previous one so batch norm always sees at least two samples.
std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n, std::size_t batch);

}  // namespace romforge::autoenc

#endif  // ROMFORGE_AUTOENC_AUTOENCODER_HPP
