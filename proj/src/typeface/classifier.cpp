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

#include "stgen/typeface/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "stgen/common/errors.hpp"
#include "stgen/common/hash.hpp"
#include "stgen/common/init.hpp"
#include "stgen/common/keyvalue.hpp"
#include "stgen/common/trace.hpp"
#include "stgen/io/image.hpp"
#include "stgen/networks/checkpoint.hpp"

namespace stgen::typeface {

namespace F = torch::nn::functional;

std::string TypefaceConfig::describe() const { return describe_fields(*this); }

std::uint64_t TypefaceConfig::fingerprint() const { return fnv1a(describe()); }

TypefaceConfig TypefaceConfig::parse(const std::string& text) {
  auto kv = parse_key_values(text);
  TypefaceConfig config;
  apply_fields(config, kv);
  if (!kv.empty()) throw ConfigError("unknown typeface key '" + kv.begin()->first + "'");
  return config;
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kBlockDepth[] = {2, 2, 4, 4, 4};
constexpr std::int64_t kBlockWidth[] = {1, 2, 4, 8, 8};
// Batches are drawn from width-sorted runs of this many batches so that
// resizing to the batch width distorts each image as little as possible.
constexpr std::size_t kBucketBatches = 8;

torch::Tensor as_batch(const torch::Tensor& image) {
  auto x = image.dim() == 3 ? image.unsqueeze(0) : image;
  if (x.dim() != 4 || x.size(1) != 3 || x.size(2) != 64) {
    std::ostringstream os;
    os << "typeface classifier expects [B, 3, 64, W], got " << image.sizes();
    throw ShapeError(os.str());
  }
  return x;
}

/// Sorts shuffled `order` by image width within runs of kBucketBatches
/// batches, then shuffles the full batches; a short batch stays last.
void bucket_by_width(std::vector<std::size_t>& order, const std::vector<torch::Tensor>& images,
                     std::size_t batch_size, std::mt19937_64& rng) {
  const auto run = batch_size * kBucketBatches;
  for (std::size_t start = 0; start < order.size(); start += run) {
    const auto end = order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + run));
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(start), end,
              [&](std::size_t a, std::size_t b) { return images[a].size(2) < images[b].size(2); });
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const auto first = order.begin() + static_cast<std::ptrdiff_t>(start);
    batches.emplace_back(first, first + static_cast<std::ptrdiff_t>(
                                            std::min(batch_size, order.size() - start)));
  }
  const bool short_tail = !batches.empty() && batches.back().size() < batch_size;
  std::shuffle(batches.begin(), batches.end() - (short_tail ? 1 : 0), rng);
  order.clear();
  for (const auto& batch : batches) order.insert(order.end(), batch.begin(), batch.end());
}

}  // namespace

TypefaceNetImpl::TypefaceNetImpl(const TypefaceConfig& config) : config_(config) {
  if (config.base_channels <= 0 || config.fc_dim <= 0) {
    throw ConfigError("typeface widths must be positive");
  }
  if (config.num_classes < 2) throw InsufficientClasses("a font classifier needs >= 2 classes");
  std::int64_t in = 3;
  int index = 0;
  for (int block = 0; block < 5; ++block) {
    const auto out = kBlockWidth[block] * config.base_channels;
    for (int layer = 0; layer < kBlockDepth[block]; ++layer, ++index) {
      const auto name = std::to_string(block + 1) + "_" + std::to_string(layer + 1);
      torch::nn::Conv2d conv(torch::nn::Conv2dOptions(in, out, 3).padding(1));
      init::conv(conv);
      convs_.push_back(register_module("conv" + name, conv));
      norms_.push_back(register_module("bn" + name, torch::nn::BatchNorm2d(out)));
      in = out;
    }
  }
  fc1 = register_module("fc1", torch::nn::Linear(in, config.fc_dim));
  fc2 = register_module("fc2", torch::nn::Linear(config.fc_dim, config.fc_dim));
  fc3 = register_module("fc3", torch::nn::Linear(config.fc_dim, config.num_classes));
  // The linear layers keep the library's fan-in uniform init; the small
  // normal init used by the generator stalls this deep plain stack.
}

StyleFeatures TypefaceNetImpl::features(const torch::Tensor& image) {
  auto h = as_batch(image);
  StyleFeatures out;
  std::size_t index = 0;
  for (int block = 0; block < 5; ++block) {
    for (int layer = 0; layer < kBlockDepth[block]; ++layer, ++index) {
      h = torch::relu(norms_[index](convs_[index](h)));
      if (layer == 0) out.layer_maps.push_back(h);
    }
    h = F::max_pool2d(h, F::MaxPool2dFuncOptions(2).stride(2).ceil_mode(true));
  }
  h = h.mean({2, 3});
  out.embedding = torch::relu(fc1(h));
  out.logits = fc3(torch::relu(fc2(out.embedding)));
  return out;
}

// ---------------------------------------------------------------------------

void FontDataset::validate() const {
  if (images.size() != labels.size()) {
    throw ShapeMismatch("font dataset has " + std::to_string(images.size()) + " images but " +
                        std::to_string(labels.size()) + " labels");
  }
  std::vector<bool> present(std::max<std::int64_t>(class_count, 0), false);
  for (auto label : labels) {
    if (label < 0 || label >= class_count) {
      throw ShapeError("font label " + std::to_string(label) + " outside [0, " +
                       std::to_string(class_count) + ")");
    }
    present[label] = true;
  }
  if (std::count(present.begin(), present.end(), true) < 2) {
    throw InsufficientClasses("font dataset must contain at least 2 classes");
  }
  for (const auto& image : images) as_batch(image);
}

double accuracy(TypefaceNet& net, const std::vector<torch::Tensor>& images,
                const std::vector<std::int64_t>& labels) {
  if (images.empty()) return 0.0;
  torch::NoGradGuard no_grad;
  const bool was_training = net->is_training();
  net->eval();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto predicted = net->forward(images[i]).argmax(1).item<std::int64_t>();
    correct += predicted == labels[i];
  }
  net->train(was_training);
  return static_cast<double>(correct) / static_cast<double>(images.size());
}

TypefaceTrainResult train_typeface_classifier(
    const FontDataset& data, const TypefaceTrainOptions& options,
    const std::function<void(const EpochStats&)>& on_epoch) {
  data.validate();
  if (options.batch_size <= 0 || options.lr <= 0.0 || options.epochs < 0) {
    throw ConfigError("typeface training needs positive batch size and learning rate");
  }
  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(data.images.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = static_cast<std::size_t>(options.val_fraction * order.size());
  std::vector<std::size_t> train(order.begin() + n_val, order.end());
  std::vector<torch::Tensor> val_images;
  std::vector<std::int64_t> val_labels;
  for (std::size_t i = 0; i < n_val; ++i) {
    val_images.push_back(data.images[order[i]]);
    val_labels.push_back(data.labels[order[i]]);
  }

  torch::manual_seed(options.seed);
  TypefaceConfig config{options.base_channels, options.fc_dim, data.class_count};
  TypefaceTrainResult result{TypefaceNet(config), {}};
  auto& net = result.net;
  torch::optim::Adam optimizer(net->parameters(), torch::optim::AdamOptions(options.lr));

  for (std::int64_t epoch = 1; epoch <= options.epochs; ++epoch) {
    net->train();
    // Cosine decay from lr to zero across the configured epochs.
    const double progress = static_cast<double>(epoch - 1) / static_cast<double>(options.epochs);
    for (auto& group : optimizer.param_groups()) {
      static_cast<torch::optim::AdamOptions&>(group.options())
          .lr(0.5 * options.lr * (1.0 + std::cos(std::numbers::pi * progress)));
    }
    std::shuffle(train.begin(), train.end(), rng);
    bucket_by_width(train, data.images, static_cast<std::size_t>(options.batch_size), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < train.size();
         start += static_cast<std::size_t>(options.batch_size)) {
      const auto end = std::min(train.size(), start + static_cast<std::size_t>(options.batch_size));
      if (end - start < 2) continue;  // batch norm needs more than one sample
      std::vector<int> widths;
      for (auto i = start; i < end; ++i) widths.push_back(data.images[train[i]].size(2));
      const int width = io::batch_width(widths);
      std::vector<torch::Tensor> xs;
      std::vector<std::int64_t> ys;
      for (auto i = start; i < end; ++i) {
        xs.push_back(io::resize_tensor(data.images[train[i]], 64, width));
        ys.push_back(data.labels[train[i]]);
      }
      optimizer.zero_grad();
      auto loss = F::cross_entropy(net->forward(torch::stack(xs)), torch::tensor(ys));
      loss.backward();
      optimizer.step();
      loss_sum += loss.item<double>();
      ++batches;
    }
    EpochStats stats{epoch, batches ? loss_sum / static_cast<double>(batches) : 0.0,
                     accuracy(net, val_images, val_labels)};
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);
    if (stats.val_accuracy >= options.target_accuracy) break;
  }
  net->eval();
  return result;
}

// ---------------------------------------------------------------------------

FrozenTypefaceClassifier::FrozenTypefaceClassifier(TypefaceNet net) : net_(std::move(net)) {
  net_->eval();
  for (auto& p : net_->parameters()) p.requires_grad_(false);
}

StyleFeatures FrozenTypefaceClassifier::extract_features(const torch::Tensor& image) const {
  trace_event("typeface_classifier");
  return net_.ptr()->features(image);
}

torch::Tensor FrozenTypefaceClassifier::classify_font(const torch::Tensor& image) const {
  return torch::softmax(extract_features(image).logits, 1);
}

std::vector<torch::Tensor> FrozenTypefaceClassifier::mutable_parameters() {
  throw FrozenWeightsError("typeface classifier weights are frozen");
}

std::uint64_t FrozenTypefaceClassifier::weight_hash() const {
  std::uint64_t h = kFnvOffset;
  for (const auto& p : net_->parameters()) h = fnv1a(p, h);
  for (const auto& b : net_->buffers()) h = fnv1a(b, h);
  return h;
}

std::int64_t FrozenTypefaceClassifier::parameter_count() const {
  std::int64_t n = 0;
  for (const auto& p : net_->parameters()) n += p.numel();
  return n;
}

void FrozenTypefaceClassifier::save(const std::filesystem::path& path) const {
  torch::serialize::OutputArchive archive;
  const auto config = net_->config().describe();
  networks::write_header(archive,
                         {networks::kCheckpointVersion, "typeface", config, fnv1a(config)});
  networks::save_module(archive, "typeface", *net_);
  networks::save_archive(archive, path);
}

FrozenTypefaceClassifier FrozenTypefaceClassifier::load(const std::filesystem::path& path) {
  torch::serialize::InputArchive archive;
  networks::load_archive(archive, path);
  const auto header = networks::read_header(archive);
  if (header.kind != "typeface") {
    throw CheckpointMismatch(path.string() + " holds a '" + header.kind +
                             "' checkpoint, not a typeface classifier");
  }
  TypefaceNet net(TypefaceConfig::parse(header.config));
  networks::load_module(archive, "typeface", *net);
  return FrozenTypefaceClassifier(std::move(net));
}

}  // namespace stgen::typeface
