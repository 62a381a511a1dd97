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

#include "doctest.h"

#include <filesystem>
#include <random>

#include "oracles/instances.hpp"
#include "stgen/common/errors.hpp"
#include "stgen/datagen/generate.hpp"
#include "stgen/networks/checkpoint.hpp"
#include "stgen/typeface/classifier.hpp"

using namespace stgen;
using namespace stgen::typeface;

namespace {

TypefaceConfig tiny(std::int64_t classes = 3) { return TypefaceConfig{4, 16, classes}; }

FontDataset rendered_fonts(std::size_t per_font, const std::vector<std::string>& font_names) {
  const renderer::TextCorpus corpus({"river", "stone", "light", "cloud", "amber", "delta", "north",
                                     "piano", "quiet", "sugar", "tiger", "ocean"});
  datagen::SynthOptions options;
  for (const auto& name : font_names) options.fonts.push_back(renderer::bundled_font(name));
  options.count = per_font * font_names.size();
  options.seed = 1;
  const auto set = datagen::synthesize(corpus, options);
  FontDataset data;
  data.class_count = static_cast<std::int64_t>(font_names.size());
  for (std::size_t i = 0; i < set.images.size(); ++i) {
    data.images.push_back(io::to_tensor(set.images[i]));
    data.labels.push_back(set.records[i].label);
  }
  return data;
}

}  // namespace

TEST_CASE("feature layout") {
  TypefaceNet net(tiny());
  net->eval();
  std::mt19937_64 rng(0);
  const auto x = torch::tanh(oracle::randn(rng, {2, 3, 64, 72}, torch::kFloat32));
  const auto f = net->features(x);
  REQUIRE(f.layer_maps.size() == kFeatureLayers);
  const std::int64_t widths[] = {4, 8, 16, 32, 32};
  const std::int64_t heights[] = {64, 32, 16, 8, 4};
  for (std::size_t i = 0; i < kFeatureLayers; ++i) {
    CHECK(f.layer_maps[i].size(1) == widths[i]);
    CHECK(f.layer_maps[i].size(2) == heights[i]);
    CHECK(f.layer_maps[i].min().item<float>() >= 0.0f);  // post-ReLU
  }
  CHECK(f.embedding.sizes() == torch::IntArrayRef{2, 16});
  CHECK(f.logits.sizes() == torch::IntArrayRef{2, 3});
  CHECK(torch::isfinite(f.embedding).all().item<bool>());
  const auto again = net->features(x);
  CHECK(torch::equal(again.embedding, f.embedding));
  CHECK_THROWS_AS(net->features(torch::zeros({1, 3, 32, 32})), ShapeError);
  CHECK_THROWS_AS(net->features(torch::zeros({1, 1, 64, 32})), ShapeError);
  CHECK_THROWS_AS(TypefaceNet(tiny(1)), InsufficientClasses);
}

TEST_CASE("frozen classifier") {
  torch::manual_seed(2);
  FrozenTypefaceClassifier classifier{TypefaceNet(tiny())};
  std::mt19937_64 rng(1);
  for (int i = 0; i < 5; ++i) {
    const auto noise = torch::rand({1, 3, 64, 40}) * 2 - 1;
    const auto p = classifier.classify_font(noise);
    CHECK(p.sizes() == torch::IntArrayRef{1, 3});
    CHECK(p.min().item<float>() >= 0.0f);
    CHECK(std::abs(p.sum().item<float>() - 1.0f) <= 1e-5f);
  }
  // Full input range and single-image layout.
  const auto single = classifier.extract_features(torch::ones({3, 64, 16}));
  CHECK(single.embedding.size(0) == 1);
  CHECK(torch::isfinite(classifier.extract_features(-torch::ones({1, 3, 64, 16})).logits).all().item<bool>());

  auto x = torch::tanh(oracle::randn(rng, {1, 3, 64, 24}, torch::kFloat32)).requires_grad_();
  const auto hash = classifier.weight_hash();
  classifier.extract_features(x).embedding.sum().backward();
  CHECK(x.grad().defined());
  CHECK(classifier.weight_hash() == hash);
  CHECK_THROWS_AS(classifier.mutable_parameters(), FrozenWeightsError);

  const auto path = std::filesystem::temp_directory_path() / "stgen_typeface.ckpt";
  classifier.save(path);
  const auto loaded = FrozenTypefaceClassifier::load(path);
  CHECK(loaded.weight_hash() == hash);
  CHECK(loaded.config().num_classes == 3);
  std::filesystem::remove(path);

  networks::GeneratorConfig g;
  g.base_channels = 4;
  g.mapping_hidden = 8;
  networks::Generator generator(g);
  networks::save_generator(path, generator);
  CHECK_THROWS_AS(FrozenTypefaceClassifier::load(path), CheckpointMismatch);
  std::filesystem::remove(path);
}

TEST_CASE("font dataset validation") {
  FontDataset one;
  one.class_count = 2;
  one.images = {torch::zeros({3, 64, 8}), torch::zeros({3, 64, 8})};
  one.labels = {0, 0};
  CHECK_THROWS_AS(one.validate(), InsufficientClasses);
  one.labels = {0, 2};
  CHECK_THROWS_AS(one.validate(), ShapeError);
  one.labels = {0};
  CHECK_THROWS_AS(one.validate(), ShapeMismatch);
  TypefaceTrainOptions options;
  CHECK_THROWS_AS(train_typeface_classifier(one, options), ShapeMismatch);
}

TEST_CASE("two clearly different fonts are learned") {
  const auto data = rendered_fonts(40, {"DejaVuSans-Bold.ttf", "DejaVuSerif.ttf"});
  TypefaceTrainOptions options;
  options.epochs = 14;
  options.batch_size = 8;
  options.lr = 3e-3;
  options.base_channels = 4;
  options.fc_dim = 32;
  options.seed = 3;
  std::vector<EpochStats> seen;
  auto result = train_typeface_classifier(data, options, [&](const EpochStats& s) { seen.push_back(s); });
  CHECK(seen.size() == result.history.size());
  CHECK(result.history.back().train_loss < result.history.front().train_loss);
  CHECK(accuracy(result.net, data.images, data.labels) >= 0.8);
  FrozenTypefaceClassifier frozen(result.net);
  CHECK(frozen.classify_font(data.images[0]).argmax(1).item<std::int64_t>() == data.labels[0]);
}
