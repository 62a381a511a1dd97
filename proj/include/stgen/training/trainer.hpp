// Copyright 2026 The stgen Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "stgen/datagen/dataset.hpp"
#include "stgen/io/image.hpp"
#include "stgen/losses/losses.hpp"
#include "stgen/networks/generator.hpp"
#include "stgen/renderer/corpus.hpp"
#include "stgen/renderer/font.hpp"
#include "stgen/training/config.hpp"
#include "stgen/typeface/classifier.hpp"

namespace stgen::training {

struct TrainingSample {
  io::RgbImage image;  // any size; batches resize to height 64
  std::string text;
  std::int64_t domain = 0;
};

struct TrainingBatch {
  torch::Tensor style;     // [B, 3, 64, W]
  std::vector<std::string> labels;
  torch::Tensor domains;   // [B] int64
  torch::Tensor content1;  // rendered labels, [B, 3, 64, W]
  torch::Tensor content2;  // rendered random corpus text, [B, 3, 64, W]
  std::vector<std::string> content2_texts;
  int width() const { return static_cast<int>(style.size(3)); }
};

/// Resizes every style image to height 64 and the batch-average width
/// (rounded up to a multiple of 4) and renders both content images at that
/// width. Throws EmptyBatch; renderer errors propagate.
TrainingBatch make_batch(const std::vector<const TrainingSample*>& samples,
                         const renderer::TextCorpus& corpus, const renderer::Font& font,
                         std::mt19937_64& rng);

/// Loads a labeled dataset as training samples (images pre-scaled to
/// height 64). Throws InvalidDomain for labels outside [0, num_domains).
std::vector<TrainingSample> load_training_samples(const datagen::LabeledDataset& data,
                                                  std::int64_t num_domains);

/// Owns the generator, discriminator and their optimizers.
class Trainer {
 public:
  /// `classifier` may be null only when config.typeface_loss is false.
  Trainer(const TrainConfig& config,
          std::shared_ptr<const typeface::FrozenTypefaceClassifier> classifier);

  /// One discriminator update (hinge + R1 on real images) followed by one
  /// generator update. Throws NonFiniteLoss naming the offending term.
  losses::LossReport train_step(const TrainingBatch& batch);

  const TrainConfig& config() const { return config_; }
  std::int64_t step() const { return step_; }
  networks::Generator& generator() { return generator_; }
  networks::Discriminator& discriminator() { return discriminator_; }
  /// Style encoder and mapping network (Adam).
  torch::optim::Adam& style_optimizer() { return *style_opt_; }
  /// Content encoder, decoder and attention (RMSprop).
  torch::optim::RMSprop& content_optimizer() { return *content_opt_; }
  torch::optim::Adam& discriminator_optimizer() { return *disc_opt_; }

  /// Hash over generator and discriminator parameters and buffers.
  std::uint64_t parameter_hash() const;

  /// Throws OutputUnwritable.
  void save_checkpoint(const std::filesystem::path& path) const;
  /// Restores weights, optimizer state and the step counter. Throws
  /// CheckpointMismatch when the architecture fingerprint differs.
  void load_checkpoint(const std::filesystem::path& path);

 private:
  TrainConfig config_;
  std::shared_ptr<const typeface::FrozenTypefaceClassifier> classifier_;
  networks::Generator generator_{nullptr};
  networks::Discriminator discriminator_{nullptr};
  std::unique_ptr<torch::optim::Adam> style_opt_;
  std::unique_ptr<torch::optim::RMSprop> content_opt_;
  std::unique_ptr<torch::optim::Adam> disc_opt_;
  std::int64_t step_ = 0;
};

/// RNG driving batch composition at a given step.
std::mt19937_64 step_rng(std::int64_t seed, std::int64_t step);

struct FitOptions {
  std::filesystem::path out_dir;  // empty: no checkpoints or log files
  std::function<void(const losses::LossReport&)> on_step;
};

struct FitResult {
  std::int64_t steps = 0;
  std::vector<std::filesystem::path> checkpoints;
  std::optional<std::filesystem::path> best;
};

/// Trains from the trainer's current step until epochs x steps-per-epoch
/// (or max_steps) is reached. Epoch e visits samples in an order drawn from
/// (seed, e), so a resumed run repeats the uninterrupted one. Writes
/// train_log.jsonl, epoch_NNNN.ckpt every checkpoint_every epochs,
/// best.ckpt (lowest epoch-mean reconstruction) and last.ckpt.
FitResult fit(Trainer& trainer, const std::vector<TrainingSample>& data,
              const renderer::TextCorpus& corpus, const FitOptions& options);

}  // namespace stgen::training
