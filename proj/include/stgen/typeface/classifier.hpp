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
#include <string>
#include <vector>

#include <torch/torch.h>

namespace stgen::typeface {

/// VGG19-BN widths scale with `base_channels` (64 gives 64..512).
struct TypefaceConfig {
  std::int64_t base_channels = 64;
  std::int64_t fc_dim = 4096;
  std::int64_t num_classes = 2;

  template <class F>
  void for_each_field(F&& f) {
    f("base_channels", base_channels);
    f("fc_dim", fc_dim);
    f("num_classes", num_classes);
  }
  std::string describe() const;
  std::uint64_t fingerprint() const;
  static TypefaceConfig parse(const std::string& text);
};

/// Activations after the first ReLU of each of the five conv blocks
/// (shallowest first) and the post-ReLU output of the first FC layer.
struct StyleFeatures {
  std::vector<torch::Tensor> layer_maps;
  torch::Tensor embedding;  // [B, fc_dim]
  torch::Tensor logits;     // [B, num_classes]
};

constexpr std::size_t kFeatureLayers = 5;

/// 16 conv3x3-BN-ReLU layers in blocks of (2, 2, 4, 4, 4) with a max pool
/// after each block, global average pooling, and three FC layers.
class TypefaceNetImpl : public torch::nn::Module {
 public:
  explicit TypefaceNetImpl(const TypefaceConfig& config);

  /// x: [B, 3, 64, W]. Throws ShapeError.
  StyleFeatures features(const torch::Tensor& x);
  torch::Tensor forward(const torch::Tensor& x) { return features(x).logits; }

  const TypefaceConfig& config() const { return config_; }

 private:
  TypefaceConfig config_;
  std::vector<torch::nn::Conv2d> convs_;
  std::vector<torch::nn::BatchNorm2d> norms_;
  torch::nn::Linear fc1{nullptr}, fc2{nullptr}, fc3{nullptr};
};
TORCH_MODULE(TypefaceNet);

/// Word images (3 x 64 x W, [-1, 1]) with font-class labels.
struct FontDataset {
  std::vector<torch::Tensor> images;
  std::vector<std::int64_t> labels;
  std::int64_t class_count = 0;

  /// Throws InsufficientClasses (< 2 classes), ShapeMismatch, ShapeError.
  void validate() const;
};

struct TypefaceTrainOptions {
  std::int64_t epochs = 10;
  std::int64_t batch_size = 256;
  double lr = 1e-3;  // peak; decays to zero on a cosine over `epochs`
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
  std::int64_t base_channels = 64;
  std::int64_t fc_dim = 4096;
  /// Stop once validation accuracy reaches this value (> 1 disables).
  double target_accuracy = 2.0;
};

struct EpochStats {
  std::int64_t epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TypefaceTrainResult {
  TypefaceNet net{nullptr};
  std::vector<EpochStats> history;
};

/// Softmax cross-entropy training with Adam on average-width batches.
/// Throws InsufficientClasses.
TypefaceTrainResult train_typeface_classifier(
    const FontDataset& data, const TypefaceTrainOptions& options,
    const std::function<void(const EpochStats&)>& on_epoch = {});

/// Accuracy of `net` (eval mode) on the given images, evaluated one at a time.
double accuracy(TypefaceNet& net, const std::vector<torch::Tensor>& images,
                const std::vector<std::int64_t>& labels);

/// Read-only view of a trained classifier. Its parameters never require
/// gradients; gradients still flow to input images.
class FrozenTypefaceClassifier {
 public:
  explicit FrozenTypefaceClassifier(TypefaceNet net);

  /// Accepts [3, 64, W] or [B, 3, 64, W]. Throws ShapeError.
  StyleFeatures extract_features(const torch::Tensor& image) const;
  /// Softmax probabilities, [B, num_classes].
  torch::Tensor classify_font(const torch::Tensor& image) const;

  /// Always throws FrozenWeightsError.
  std::vector<torch::Tensor> mutable_parameters();

  /// Hash over every parameter and buffer, for bit-identity checks.
  std::uint64_t weight_hash() const;
  std::int64_t parameter_count() const;
  const TypefaceConfig& config() const { return net_->config(); }

  void save(const std::filesystem::path& path) const;
  /// Throws CheckpointError / CheckpointMismatch.
  static FrozenTypefaceClassifier load(const std::filesystem::path& path);

 private:
  TypefaceNet net_;
};

}  // namespace stgen::typeface
