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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Usage: acceptance [criterion ...]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <opencv2/imgcodecs.hpp>

#include "oracles/attention_oracles.hpp"
#include "oracles/edit_distance.hpp"
#include "oracles/finite_diff.hpp"
#include "oracles/instances.hpp"
#include "stgen/attention/modules.hpp"
#include "stgen/attention/ops.hpp"
#include "stgen/common/errors.hpp"
#include "stgen/common/log.hpp"
#include "stgen/common/trace.hpp"
#include "stgen/common/utf8.hpp"
#include "stgen/datagen/dataset.hpp"
#include "stgen/datagen/generate.hpp"
#include "stgen/eval/metrics.hpp"
#include "stgen/losses/losses.hpp"
#include "stgen/networks/generator.hpp"
#include "stgen/renderer/font.hpp"
#include "stgen/renderer/render.hpp"
#include "stgen/training/trainer.hpp"
#include "stgen/typeface/classifier.hpp"

namespace fs = std::filesystem;
using namespace stgen;
using attention::Backend;

namespace {

// ---------------------------------------------------------------------------
// Tolerances and sizes.

constexpr double kOracleTol = 1e-5;          // float32 max abs error
constexpr int kOracleInstances = 50;         // per op
constexpr double kGradTol = 1e-4;            // relative error, float64
constexpr double kGradStep = 1e-4;
constexpr int kGradInstances = 10;           // per op
constexpr double kLossTol = 1e-6;
constexpr double kIdentityTol = 1e-6;
constexpr int kAdainDraws = 100;
constexpr double kAdainMeanTol = 1e-4;
constexpr double kAdainStdTol = 1e-3;
constexpr double kZeroOffsetTol = 1e-5;
constexpr double kMicroRatio = 0.5;          // MA(final) <= ratio * MA(window)
constexpr double kMicroMinutes = 30.0;
constexpr double kTypefaceAccuracy = 0.9;
constexpr int kTypefaceEpochs = 10;
constexpr int kFrozenSteps = 100;
constexpr int kEditPairs = 1000;
constexpr double kNedTol = 1e-9;
constexpr std::size_t kGenerateCount = 100;

// The overfit micro-run. Widths are scaled down so 500 steps fit the time
// budget on one CPU core.
struct MicroRun {
  std::size_t images = 32;
  std::int64_t batch_size = 8;
  std::int64_t steps = 500;
  std::int64_t window = 50;
  std::int64_t base_channels = 8;
  std::int64_t mapping_hidden = 64;
  double lr = 1e-3;
  bool random_colors = false;
};

constexpr Backend kBackends[] = {Backend::kReference, Backend::kOpenMP};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buffer[256];
  std::snprintf(buffer, sizeof buffer, format, a, b, c);
  return buffer;
}

double max_abs(const torch::Tensor& a, const torch::Tensor& b) {
  return (a.to(torch::kFloat64) - b.to(torch::kFloat64)).abs().max().item<double>();
}

// Fan-in scaled weights keep activations of order one; biases get std 0.5.
void randomize(torch::nn::Module& m, std::mt19937_64& rng) {
  torch::NoGradGuard no_grad;
  for (auto& p : m.parameters()) {
    const double scale =
        p.dim() >= 2 ? 1.0 / std::sqrt(static_cast<double>(p.numel() / p.size(0))) : 0.5;
    p.copy_(oracle::randn(rng, p.sizes().vec(), p.scalar_type()) * scale);
  }
}

int uniform(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

oracle::Fcn fcn_of(attention::LocalAttention& la) {
  oracle::Fcn f;
  f.w1 = oracle::to_vec(la->fc1->weight);
  f.b1 = oracle::to_vec(la->fc1->bias);
  f.w2 = oracle::to_vec(la->fc2->weight);
  f.b2 = oracle::to_vec(la->fc2->bias);
  f.in = la->fc1->weight.size(1);
  f.hidden = la->fc1->weight.size(0);
  f.out = la->fc2->weight.size(0);
  return f;
}

std::vector<oracle::GlobalStage> stages_of(attention::GlobalAttentionBlock& block) {
  std::vector<oracle::GlobalStage> stages;
  for (std::int64_t t = 0; t < block->depth(); ++t) {
    auto& conv = block->predictor(t)->conv;
    auto& deform = block->deform(t);
    stages.push_back({conv->weight.to(torch::kFloat64), conv->bias.to(torch::kFloat64),
                      deform->weight.to(torch::kFloat64), deform->bias.to(torch::kFloat64)});
  }
  return stages;
}

struct BilinearInstance {
  torch::Tensor map, coords;
};

// Coordinates reach one pixel beyond the border to exercise zero padding.
BilinearInstance random_bilinear(std::mt19937_64& rng, torch::Dtype dtype) {
  const int b = uniform(rng, 1, 2), c = uniform(rng, 1, 4), h = uniform(rng, 2, 8),
            w = uniform(rng, 2, 8);
  const int ho = uniform(rng, 1, 6), wo = uniform(rng, 1, 6);
  BilinearInstance inst;
  inst.map = oracle::randn(rng, {b, c, h, w}, dtype);
  inst.coords = oracle::off_grid_tensor(rng, {b, ho, wo, 2}, -1.0, std::max(h, w), dtype);
  return inst;
}

struct LocalInstance {
  std::int64_t channels, patch, hidden;
  torch::Tensor query, key;
};

LocalInstance random_local(std::mt19937_64& rng, torch::Dtype dtype) {
  const std::int64_t patches[] = {1, 3, 5};
  LocalInstance inst;
  inst.channels = uniform(rng, 1, 4);
  inst.patch = patches[uniform(rng, 0, 2)];
  inst.hidden = uniform(rng, 2, 6);
  // The window may overhang the map by at most its radius.
  const int min_hw = static_cast<int>(std::max<std::int64_t>(2, (inst.patch + 1) / 2));
  const int b = uniform(rng, 1, 2), h = uniform(rng, min_hw, 8), w = uniform(rng, min_hw, 8);
  inst.query = oracle::randn(rng, {b, inst.channels, h, w}, dtype);
  inst.key = oracle::randn(rng, {b, inst.channels, h, w}, dtype);
  return inst;
}

struct GlobalInstance {
  std::int64_t channels, key_channels, depth;
  torch::Tensor content, decoder;
};

GlobalInstance random_global(std::mt19937_64& rng, torch::Dtype dtype, int max_hw) {
  GlobalInstance inst;
  inst.channels = uniform(rng, 1, 4);
  inst.key_channels = uniform(rng, 1, 4);
  inst.depth = uniform(rng, 1, 3);
  const int b = uniform(rng, 1, 2), h = uniform(rng, 2, max_hw), w = uniform(rng, 2, max_hw);
  inst.content = oracle::randn(rng, {b, inst.channels, h, w}, dtype);
  inst.decoder = oracle::randn(rng, {b, inst.key_channels, h, w}, dtype);
  return inst;
}

// Smallest distance of any predicted offset to an integer. Sampling points
// sit on integer grids plus offsets, so this is the distance to the nearest
// bilinear kink.
double kink_margin(attention::GlobalAttentionBlock& block, const torch::Tensor& content,
                   const torch::Tensor& decoder) {
  torch::NoGradGuard no_grad;
  std::vector<torch::Tensor> dense{content};
  auto value = content;
  double margin = 0.5;
  for (std::int64_t t = 0; t < block->depth(); ++t) {
    const auto offsets = block->predictor(t)->forward(torch::cat(dense, 1), decoder);
    const auto frac = offsets - offsets.floor();
    margin = std::min(margin, torch::min(frac, 1.0 - frac).min().item<double>());
    value = block->deform(t)->forward(value, offsets);
    dense.push_back(value);
  }
  return margin;
}

// Smallest |pre-activation| of the window FCN's hidden layer, the distance
// to its leaky ReLU kink.
double kink_margin(attention::LocalAttention& la, const torch::Tensor& query,
                   const torch::Tensor& key, std::int64_t patch) {
  torch::NoGradGuard no_grad;
  const auto b = key.size(0), h = key.size(2), w = key.size(3);
  const auto patches =
      attention::extract_patches(key, patch).view({b, h, w, patch * patch * key.size(1)});
  return la->fc1->forward(torch::cat({patches, query.permute({0, 2, 3, 1})}, 3))
      .abs()
      .min()
      .item<double>();
}

// ---------------------------------------------------------------------------
// 1. Attention ops against scalar-loop oracles.

Outcome criterion_oracles() {
  std::mt19937_64 rng(101);
  std::map<std::string, double> worst;
  double largest = 0.0;  // largest |oracle output|, for scale
  auto seen = [&](const torch::Tensor& t) { largest = std::max(largest, t.abs().max().item<double>()); };
  for (int i = 0; i < kOracleInstances; ++i) {
    const auto d = oracle::random_deform_instance(rng);
    const auto expected =
        oracle::deform_conv(d.input, d.offsets, d.weight, d.bias, d.stride, d.pad);
    seen(expected);
    for (auto backend : kBackends) {
      const auto out = attention::deform_conv2d(d.input, d.offsets, d.weight, d.bias,
                                                {d.stride, d.pad, backend});
      worst["deform_conv"] = std::max(worst["deform_conv"], max_abs(out, expected));
    }

    const auto s = random_bilinear(rng, torch::kFloat32);
    const auto sampled = oracle::bilinear_sample(s.map, s.coords);
    seen(sampled);
    for (auto backend : kBackends) {
      worst["bilinear"] = std::max(
          worst["bilinear"], max_abs(attention::bilinear_sample(s.map, s.coords, backend), sampled));
    }

    const auto l = random_local(rng, torch::kFloat32);
    for (auto backend : kBackends) {
      attention::LocalAttention la(l.channels, l.patch, l.hidden, false, backend);
      randomize(*la, rng);
      const auto expected_local = oracle::local_attention(l.query, l.key, l.patch, fcn_of(la));
      seen(expected_local);
      worst["local_attention"] =
          std::max(worst["local_attention"], max_abs(la->forward(l.query, l.key), expected_local));
    }

    const auto g = random_global(rng, torch::kFloat32, 8);
    for (auto backend : kBackends) {
      attention::GlobalAttentionBlock block(g.channels, g.key_channels, g.depth, backend);
      randomize(*block, rng);
      const auto expected_global =
          oracle::global_attention_block(g.content, g.decoder, stages_of(block));
      seen(expected_global);
      worst["global_block"] = std::max(worst["global_block"],
                                       max_abs(block->forward(g.content, g.decoder), expected_global));
    }
  }
  Outcome o{true, ""};
  for (const auto& [op, err] : worst) {
    o.pass = o.pass && err <= kOracleTol;
    o.detail += op + fmt(" %.1e ", err);
  }
  o.detail += "(" + std::to_string(kOracleInstances) + " instances x 2 backends per op" +
              fmt(", outputs up to %.1f)", largest);
  return o;
}

// ---------------------------------------------------------------------------
// 2. Gradient checks in double precision.

Outcome criterion_gradients() {
  std::mt19937_64 rng(202);
  std::map<std::string, double> worst;
  int redrawn = 0;
  auto record = [&](const std::string& op, const oracle::GradCheck& r) {
    worst[op] = std::max(worst[op], r.worst());
  };
  for (int i = 0; i < kGradInstances; ++i) {
    const auto backend = kBackends[i % 2];

    const auto d = oracle::random_deform_instance(rng, torch::kFloat64);
    record("deform_conv",
           oracle::check_gradients(
               [&](const std::vector<torch::Tensor>& v) {
                 return attention::deform_conv2d(v[0], v[1], v[2], v[3],
                                                 {d.stride, d.pad, backend});
               },
               {d.input, d.offsets, d.weight, d.bias}, {true, true, true, true}, kGradStep));

    const auto s = random_bilinear(rng, torch::kFloat64);
    record("bilinear", oracle::check_gradients(
                           [&](const std::vector<torch::Tensor>& v) {
                             return attention::bilinear_sample(v[0], v[1], backend);
                           },
                           {s.map, s.coords}, {true, true}, kGradStep));

    // Local attention w.r.t. query, key and both FCN layers. A step of 1e-4
    // moves a hidden pre-activation by under 1e-3, so instances with one that
    // close to the leaky ReLU kink are redrawn.
    LocalInstance l;
    attention::LocalAttention la{nullptr};
    do {
      l = random_local(rng, torch::kFloat64);
      la = attention::LocalAttention(l.channels, l.patch, l.hidden, false, backend);
      la->to(torch::kFloat64);
      randomize(*la, rng);
      ++redrawn;
    } while (kink_margin(la, l.query, l.key, l.patch) < 1e-3);
    --redrawn;
    const std::vector<torch::Tensor> local_inputs{
        l.query, l.key, la->fc1->weight.detach().clone(), la->fc1->bias.detach().clone(),
        la->fc2->weight.detach().clone(), la->fc2->bias.detach().clone()};
    record("local_attention", oracle::check_gradients(
                                  [&](const std::vector<torch::Tensor>& v) {
                                    la->fc1->weight = v[2];
                                    la->fc1->bias = v[3];
                                    la->fc2->weight = v[4];
                                    la->fc2->bias = v[5];
                                    return la->forward(v[0], v[1]);
                                  },
                                  local_inputs, std::vector<bool>(6, true), kGradStep));

    // Global block w.r.t. both feature maps and every stage's weights.
    // A step of 1e-4 moves a predicted offset by under 1e-3; instances with an
    // offset that close to an integer are redrawn, since the step could cross
    // a bilinear kink there.
    GlobalInstance g;
    attention::GlobalAttentionBlock block{nullptr};
    do {
      g = random_global(rng, torch::kFloat64, 5);
      block = attention::GlobalAttentionBlock(g.channels, g.key_channels, g.depth, backend);
      block->to(torch::kFloat64);
      randomize(*block, rng);
      ++redrawn;
    } while (kink_margin(block, g.content, g.decoder) < 1e-3);
    --redrawn;
    std::vector<torch::Tensor> global_inputs{g.content, g.decoder};
    for (std::int64_t t = 0; t < g.depth; ++t) {
      global_inputs.push_back(block->predictor(t)->conv->weight.detach().clone());
      global_inputs.push_back(block->predictor(t)->conv->bias.detach().clone());
      global_inputs.push_back(block->deform(t)->weight.detach().clone());
      global_inputs.push_back(block->deform(t)->bias.detach().clone());
    }
    record("global_block",
           oracle::check_gradients(
               [&](const std::vector<torch::Tensor>& v) {
                 for (std::int64_t t = 0; t < g.depth; ++t) {
                   block->predictor(t)->conv->weight = v[2 + 4 * t];
                   block->predictor(t)->conv->bias = v[3 + 4 * t];
                   block->deform(t)->weight = v[4 + 4 * t];
                   block->deform(t)->bias = v[5 + 4 * t];
                 }
                 return block->forward(v[0], v[1]);
               },
               global_inputs, std::vector<bool>(global_inputs.size(), true), kGradStep));
  }
  Outcome o{true, ""};
  for (const auto& [op, err] : worst) {
    o.pass = o.pass && err <= kGradTol;
    o.detail += op + fmt(" %.1e ", err);
  }
  o.detail += "(" + std::to_string(kGradInstances) + " instances per op, " +
              std::to_string(redrawn) + " near-kink draws replaced)";
  return o;
}

// ---------------------------------------------------------------------------
// 3. Loss arithmetic and default weights.

Outcome criterion_loss_arithmetic() {
  using namespace losses;
  auto v = [](const torch::Tensor& t) { return t.item<double>(); };
  auto s = [](std::vector<float> x) { return torch::tensor(x); };
  std::vector<std::pair<std::string, std::pair<double, double>>> cases;
  auto add = [&](const std::string& name, double got, double want) {
    cases.push_back({name, {got, want}});
  };
  add("hinge_d(+1,-1)", v(hinge_d_loss(s({1}), s({-1}))), 0.0);
  add("hinge_d(0,0)", v(hinge_d_loss(s({0}), s({0}))), 2.0);
  add("hinge_d(+2,-3)", v(hinge_d_loss(s({2}), s({-3}))), 0.0);
  add("hinge_g(0.5)", v(hinge_g_loss(s({0.5f}))), -0.5);
  add("hinge_g({1,-1})", v(hinge_g_loss(s({1, -1}))), 0.0);

  std::mt19937_64 rng(303);
  const auto x = oracle::randn(rng, {1, 3, 4, 5});
  add("r1(constant)",
      v(r1_penalty([](const torch::Tensor& t) { return 0 * t.flatten(1).sum(1) + 2; }, x, 10.0)),
      0.0);
  add("r1(sum head)",
      v(r1_penalty([](const torch::Tensor& t) { return t.flatten(1).sum(1); }, x, 10.0)),
      10.0 / 2.0 * static_cast<double>(x.numel()));

  const LossWeights w;
  const auto one = torch::ones({}, torch::kFloat64);
  const auto zero = torch::zeros({}, torch::kFloat64);
  add("total(all 0)", v(total_generator_loss({zero, zero, zero, zero, zero}, w)), 0.0);
  add("total(all 1)", v(total_generator_loss({one, one, one, one, one}, w)), 13.1);
  LossWeights doubled = w;
  doubled.lambda_img *= 2.0;
  add("total(all 1, 2 lambda_img)", v(total_generator_loss({one, one, one, one, one}, doubled)),
      23.1);

  add("lambda1", w.lambda1, 1.0);
  add("lambda2", w.lambda2, 250.0);
  add("lambda3", w.lambda3, 1.0);
  add("lambda_cnt", w.lambda_cnt, 1.0);
  add("lambda_img", w.lambda_img, 10.0);
  add("lambda_sty1", w.lambda_sty1, 1.0);
  add("gamma_r1", w.gamma_r1, 10.0);

  Outcome o{true, std::to_string(cases.size()) + " examples"};
  for (const auto& [name, values] : cases) {
    if (std::abs(values.first - values.second) > kLossTol) {
      o.pass = false;
      o.detail += "; " + name + fmt(" = %.9g, expected %.9g", values.first, values.second);
    }
  }
  return o;
}

// ---------------------------------------------------------------------------
// 4. Losses vanish on identical inputs.

Outcome criterion_identity_zero() {
  std::mt19937_64 rng(404);
  torch::manual_seed(404);
  const typeface::FrozenTypefaceClassifier classifier{
      typeface::TypefaceNet(typeface::TypefaceConfig{8, 32, 5})};
  double worst_img = 0.0, worst_cnt = 0.0, worst_sty = 0.0;
  for (int i = 0; i < 10; ++i) {
    const auto image = torch::tanh(oracle::randn(rng, {2, 3, 64, 8 * uniform(rng, 2, 12)},
                                                 torch::kFloat32));
    const auto features = oracle::randn(rng, {2, 16, 8, 12}, torch::kFloat32);
    worst_img = std::max(worst_img, losses::reconstruction_loss(image, image.clone()).item<double>());
    worst_cnt = std::max(worst_cnt,
                         losses::content_consistency_loss(features, features.clone()).item<double>());
    worst_sty = std::max(worst_sty, losses::style_alignment_loss(image, image.clone(), classifier,
                                                                 losses::LossWeights{})
                                        .item<double>());
  }
  return {worst_img <= kIdentityTol && worst_cnt <= kIdentityTol && worst_sty <= kIdentityTol,
          fmt("reconstruction %.1e content %.1e style %.1e (10 pairs each)", worst_img, worst_cnt,
              worst_sty)};
}

// ---------------------------------------------------------------------------
// 5. AdaIN output statistics.

Outcome criterion_adain() {
  std::mt19937_64 rng(505);
  double mean_err = 0.0, std_err = 0.0;
  std::int64_t channels = 0;
  for (int i = 0; i < kAdainDraws; ++i) {
    const auto c = uniform(rng, 1, 8);
    const auto x = oracle::randn(rng, {2, c, 12, 20}) * (1.0 + 3.0 * uniform(rng, 0, 1)) + 0.5;
    const auto gamma = oracle::randn(rng, {2, c}) * 2.0;
    const auto beta = oracle::randn(rng, {2, c}) * 2.0;
    const auto y = networks::adain(x, gamma, beta).flatten(2);
    const auto mean = y.mean(2);
    const auto stdev = (y - mean.unsqueeze(2)).pow(2).mean(2).sqrt();
    const auto input_std = x.flatten(2).std(2, false);
    const auto valid = input_std > 1e-3;  // non-degenerate channels
    mean_err = std::max(mean_err, (mean - beta).abs().max().item<double>());
    std_err = std::max(std_err,
                       ((stdev - gamma.abs()).abs() * valid).max().item<double>());
    channels += valid.sum().item<std::int64_t>();
  }
  return {mean_err <= kAdainMeanTol && std_err <= kAdainStdTol,
          fmt("mean err %.1e std err %.1e over %.0f channels", mean_err, std_err,
              static_cast<double>(channels))};
}

// ---------------------------------------------------------------------------
// 6. Zero offsets reduce deformable convolution to convolution.

Outcome criterion_zero_offset() {
  std::mt19937_64 rng(606);
  double worst = 0.0;
  for (int i = 0; i < kOracleInstances; ++i) {
    const auto d = oracle::random_deform_instance(rng);
    const auto expected = torch::conv2d(d.input, d.weight, d.bias, d.stride, d.pad);
    for (auto backend : kBackends) {
      const auto out = attention::deform_conv2d(d.input, torch::zeros_like(d.offsets), d.weight,
                                                d.bias, {d.stride, d.pad, backend});
      worst = std::max(worst, max_abs(out, expected));
    }
  }
  return {worst <= kZeroOffsetTol, fmt("max |diff| %.1e over 50 instances x 2 backends", worst)};
}

// ---------------------------------------------------------------------------
// 7. Overfit micro-run (shared with criterion 11).

const renderer::TextCorpus& micro_words() {
  static const renderer::TextCorpus corpus({"river", "stone", "light", "cloud", "amber", "delta",
                                            "forest", "north", "piano", "quiet", "sugar", "tiger"});
  return corpus;
}

struct MicroResult {
  std::unique_ptr<training::Trainer> trainer;
  std::vector<double> img;  // per step
  std::optional<std::string> failure;
  double minutes = 0.0;
  datagen::SynthSet styles;
};

MicroResult& micro_run() {
  static std::optional<MicroResult> cached;
  if (cached) return *cached;
  cached.emplace();
  auto& result = *cached;
  const MicroRun run;
  datagen::SynthOptions synth;
  synth.fonts = {renderer::bundled_font("DejaVuSans-Bold.ttf"),
                 renderer::bundled_font("DejaVuSerif.ttf")};
  synth.count = run.images;
  synth.seed = 7;
  synth.random_colors = run.random_colors;
  result.styles = datagen::synthesize(micro_words(), synth);
  std::vector<training::TrainingSample> data;
  for (std::size_t i = 0; i < result.styles.images.size(); ++i) {
    // Domain alternates independently of the font.
    data.push_back({result.styles.images[i], result.styles.records[i].text,
                    static_cast<std::int64_t>((i / 2) % 2)});
  }

  training::TrainConfig config;
  config.batch_size = run.batch_size;
  config.epochs = (run.steps * run.batch_size + run.images - 1) / run.images;
  config.max_steps = run.steps;
  config.lr = run.lr;
  config.typeface_loss = false;
  config.seed = 7;
  config.model.base_channels = run.base_channels;
  config.model.mapping_hidden = run.mapping_hidden;
  result.trainer = std::make_unique<training::Trainer>(config, nullptr);

  training::FitOptions options;
  options.on_step = [&](const losses::LossReport& r) {
    result.img.push_back(r.img);
    if (r.step % 50 == 0) {
      std::fprintf(stderr, "  micro-run step %lld img %.4f\n", static_cast<long long>(r.step), r.img);
    }
  };
  const auto start = std::chrono::steady_clock::now();
  try {
    training::fit(*result.trainer, data, micro_words(), options);
  } catch (const NonFiniteLoss& e) {
    result.failure = std::string("NonFiniteLoss: ") + e.what();
  }
  result.minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
  return result;
}

double moving_average(const std::vector<double>& values, std::size_t end, std::size_t window) {
  double sum = 0.0;
  for (std::size_t i = end - window; i < end; ++i) sum += values[i];
  return sum / static_cast<double>(window);
}

Outcome criterion_micro_run() {
  const MicroRun run;
  auto& result = micro_run();
  if (result.failure) return {false, *result.failure};
  const auto steps = static_cast<std::size_t>(run.steps);
  const auto window = static_cast<std::size_t>(run.window);
  if (result.img.size() != steps) {
    return {false, "ran " + std::to_string(result.img.size()) + " steps"};
  }
  const double early = moving_average(result.img, window, window);
  const double late = moving_average(result.img, steps, window);
  const bool pass = late <= kMicroRatio * early && result.minutes <= kMicroMinutes;
  return {pass, fmt("img moving average %.4f at step 50, %.4f at step 500 (ratio %.3f)", early, late,
                    late / early) +
                    fmt(", %.1f min", result.minutes)};
}

// ---------------------------------------------------------------------------
// 8. Typeface toy training and frozen weights.

std::vector<std::string> random_words(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < count; ++i) {
    std::string w;
    const int length = uniform(rng, 3, 8);
    for (int k = 0; k < length; ++k) w.push_back(static_cast<char>('a' + uniform(rng, 0, 25)));
    if (i % 3 == 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    words.push_back(w);
  }
  return words;
}

Outcome criterion_typeface() {
  // Five distinct faces. DejaVu Sans Mono is left out: it shares the
  // letterforms of DejaVu Sans and differs mainly in spacing.
  std::vector<fs::path> fonts;
  for (const char* name : {"DejaVuSans.ttf", "DejaVuSans-Bold.ttf", "DejaVuSerif.ttf",
                           "DejaVuSerif-Bold.ttf", "DejaVuSerif-Italic.ttf"}) {
    fonts.push_back(renderer::bundled_font(name));
  }
  const auto words = random_words(200, 808);
  typeface::FontDataset data;
  data.class_count = static_cast<std::int64_t>(fonts.size());
  for (std::size_t f = 0; f < fonts.size(); ++f) {
    const auto font = renderer::Font::load(fonts[f]);
    for (const auto& word : words) {
      data.images.push_back(io::to_tensor(renderer::render_text(*font, word, 64)));
      data.labels.push_back(static_cast<std::int64_t>(f));
    }
  }
  typeface::TypefaceTrainOptions options;
  options.epochs = kTypefaceEpochs;
  options.batch_size = 16;
  options.lr = 1e-3;
  options.val_fraction = 0.2;
  options.seed = 8;
  options.base_channels = 8;
  options.fc_dim = 64;
  options.target_accuracy = kTypefaceAccuracy;
  const auto start = std::chrono::steady_clock::now();
  auto trained = typeface::train_typeface_classifier(data, options, [](const typeface::EpochStats& s) {
    std::fprintf(stderr, "  typeface epoch %lld loss %.4f val accuracy %.4f\n",
                 static_cast<long long>(s.epoch), s.train_loss, s.val_accuracy);
  });
  double best = 0.0;
  for (const auto& s : trained.history) best = std::max(best, s.val_accuracy);
  const auto epochs = trained.history.size();
  const double train_minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;

  auto classifier =
      std::make_shared<const typeface::FrozenTypefaceClassifier>(std::move(trained.net));
  const auto before = classifier->weight_hash();
  training::TrainConfig config;
  config.batch_size = 4;
  config.epochs = 1000;
  config.max_steps = kFrozenSteps;
  config.typeface_loss = true;
  config.model.base_channels = 4;
  config.model.mapping_hidden = 16;
  training::Trainer trainer(config, classifier);
  std::vector<training::TrainingSample> samples;
  for (std::size_t i = 0; i < 16; ++i) {
    samples.push_back({io::from_tensor(data.images[i * 50]), words[(i * 50) % words.size()],
                       static_cast<std::int64_t>(i % 2)});
  }
  const auto steps = training::fit(trainer, samples, renderer::TextCorpus(words), {}).steps;
  const auto after = classifier->weight_hash();

  const bool pass = best >= kTypefaceAccuracy && steps == kFrozenSteps && before == after;
  return {pass, fmt("val accuracy %.4f after %.0f epochs (%.1f min); ", best,
                    static_cast<double>(epochs), train_minutes) +
                    (before == after ? "weight hash unchanged" : "weight hash CHANGED") +
                    fmt(" after %.0f GAN steps", static_cast<double>(steps))};
}

// ---------------------------------------------------------------------------
// 9. Edit distance.

Outcome criterion_edit_distance() {
  std::mt19937_64 rng(909);
  int mismatches = 0;
  for (int i = 0; i < kEditPairs; ++i) {
    std::u32string a, b;
    const int la = uniform(rng, 0, 12), lb = uniform(rng, 0, 12);
    for (int k = 0; k < la; ++k) a.push_back(U'a' + uniform(rng, 0, 4));
    for (int k = 0; k < lb; ++k) b.push_back(U'a' + uniform(rng, 0, 4));
    mismatches += eval::levenshtein(std::u32string_view(a), std::u32string_view(b)) !=
                  oracle::edit_distance(a, b);
  }
  struct Example {
    const char* pred;
    const char* gt;
    double expected;
  };
  const Example examples[] = {{"abc", "abc", 1.0}, {"", "a", 0.0}, {"abc", "abd", 1.0 - 1.0 / 3.0}};
  double worst = 0.0;
  for (const auto& e : examples) {
    worst = std::max(worst, std::abs(eval::normalized_edit_distance(e.pred, e.gt) - e.expected));
  }
  const bool small = eval::levenshtein("", "") == 0 && eval::levenshtein("abc", "abd") == 1;
  return {mismatches == 0 && worst <= kNedTol && small,
          fmt("%.0f / 1000 oracle mismatches, worst example error %.1e", mismatches, worst)};
}

// ---------------------------------------------------------------------------
// 10. Ablation flags.

std::int64_t count_parameters(const torch::nn::Module& m) {
  std::int64_t n = 0;
  for (const auto& p : m.parameters()) n += p.numel();
  return n;
}

std::int64_t model_parameters(training::Trainer& t,
                              const typeface::FrozenTypefaceClassifier* classifier) {
  return count_parameters(*t.generator()) + count_parameters(*t.discriminator()) +
         (classifier ? classifier->parameter_count() : 0);
}

Outcome criterion_ablations() {
  std::mt19937_64 rng(1010);
  torch::manual_seed(1010);
  const auto classifier = std::make_shared<const typeface::FrozenTypefaceClassifier>(
      typeface::TypefaceNet(typeface::TypefaceConfig{4, 16, 2}));
  const auto words = random_words(8, 1011);
  std::vector<training::TrainingSample> samples;
  const auto font = renderer::Font::load(renderer::default_font_path());
  for (std::size_t i = 0; i < 4; ++i) {
    samples.push_back({renderer::render_text(*font, words[i], 64, datagen::random_text_style(rng)), words[i],
                       static_cast<std::int64_t>(i % 2)});
  }
  std::vector<const training::TrainingSample*> picked;
  for (const auto& s : samples) picked.push_back(&s);
  auto batch_rng = training::step_rng(0, 0);
  const auto batch =
      training::make_batch(picked, renderer::TextCorpus(words), *font, batch_rng);

  auto base_config = [] {
    training::TrainConfig c;
    c.batch_size = 4;
    c.model.base_channels = 4;
    c.model.mapping_hidden = 16;
    return c;
  };
  struct Variant {
    std::string name, event;
    std::function<void(training::TrainConfig&)> apply;
  };
  const std::vector<Variant> variants{
      {"full", "", [](training::TrainConfig&) {}},
      {"w/o global attention 3", "global_attention_low",
       [](training::TrainConfig& c) { c.model.global_attention_low = false; }},
      {"w/o local attention 1", "local_attention_high",
       [](training::TrainConfig& c) { c.model.local_attention_high = false; }},
      {"w/o typeface classifier", "typeface_classifier",
       [](training::TrainConfig& c) { c.typeface_loss = false; }},
  };
  const std::vector<std::string> events{"global_attention_low", "local_attention_high",
                                        "typeface_classifier"};
  std::int64_t full_count = 0;
  Outcome o{true, ""};
  for (const auto& v : variants) {
    auto config = base_config();
    v.apply(config);
    const auto* used = config.typeface_loss ? classifier.get() : nullptr;
    training::Trainer trainer(config, config.typeface_loss ? classifier : nullptr);
    const auto count = model_parameters(trainer, used);
    ComputationTrace trace;
    {
      TraceScope scope(&trace);
      trainer.train_step(batch);
    }
    if (v.event.empty()) {
      full_count = count;
      for (const auto& e : events) {
        if (!trace.contains(e)) {
          o.pass = false;
          o.detail += "full model misses " + e + "; ";
        }
      }
      continue;
    }
    const bool fewer = count < full_count;
    const bool absent = !trace.contains(v.event);
    o.pass = o.pass && fewer && absent;
    o.detail += v.name + ": " + std::to_string(count) + " < " + std::to_string(full_count) +
                (fewer ? "" : " FAILS") + (absent ? ", branch absent; " : ", branch TRACED; ");
  }
  return o;
}

// ---------------------------------------------------------------------------
// 11. End-to-end pipeline through the command-line tool.

std::string run_command(const std::string& command, int& status) {
  std::string output;
  FILE* pipe = popen((command + " 2>&1").c_str(), "r");
  if (!pipe) {
    status = -1;
    return output;
  }
  char buffer[512];
  while (std::fgets(buffer, sizeof buffer, pipe)) output += buffer;
  status = pclose(pipe);
  return output;
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome criterion_pipeline() {
  auto& micro = micro_run();
  if (micro.failure) return {false, "micro-run failed: " + *micro.failure};
  const auto dir = fs::temp_directory_path() / "stgen_acceptance_pipeline";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto ckpt = dir / "micro.ckpt";
  micro.trainer->save_checkpoint(ckpt);
  datagen::write_dataset(dir / "styles", micro.styles.records, micro.styles.images);

  const std::vector<std::string> texts{"apple", "Борис", "tree", "하늘", "wind",
                                       "stone", "Алма",  "sky",  "ox",   "river"};
  {
    std::ofstream out(dir / "texts.txt");
    for (const auto& t : texts) out << t << '\n';
  }
  const std::string cli = STGEN_CLI_PATH;
  int status = 0;
  const auto generated = dir / "generated";
  auto log = run_command(cli + " generate --ckpt " + quoted(ckpt) + " --styles " +
                             quoted(dir / "styles") + " --texts " + quoted(dir / "texts.txt") +
                             " --n " + std::to_string(kGenerateCount) + " --seed 3 --out " +
                             quoted(generated),
                         status);
  if (status != 0) return {false, "generate failed: " + log};

  Outcome o{true, ""};
  auto fail = [&](const std::string& why) {
    o.pass = false;
    o.detail += why + "; ";
  };
  const auto dataset = datagen::load_dataset(generated);
  if (dataset.size() != kGenerateCount) fail("dataset has " + std::to_string(dataset.size()) + " records");
  const std::set<std::string> allowed(texts.begin(), texts.end());
  std::size_t decoded = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto image = cv::imread(dataset.image_path(i).string(), cv::IMREAD_UNCHANGED);
    decoded += !image.empty() && image.rows == 64 && dataset.image_path(i).extension() == ".png";
    if (!allowed.count(dataset.records()[i].text)) fail("unexpected text " + dataset.records()[i].text);
  }
  if (decoded != dataset.size()) fail(std::to_string(decoded) + " PNGs decode at height 64");

  // Manifest round trip: parse and format every line, and rewrite the file.
  std::ifstream manifest(generated / datagen::kManifestName, std::ios::binary);
  const std::string original((std::istreambuf_iterator<char>(manifest)), {});
  std::istringstream lines(original);
  std::string line;
  std::size_t line_no = 0, stable = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const auto record = datagen::parse_manifest_line(line, line_no);
    stable += datagen::format_manifest_line(record) == line &&
              record == dataset.records()[line_no - 1];
  }
  datagen::write_manifest(dir / "rewritten", dataset.records());
  std::ifstream rewritten_file(dir / "rewritten" / datagen::kManifestName, std::ios::binary);
  const std::string rewritten((std::istreambuf_iterator<char>(rewritten_file)), {});
  if (stable != dataset.size() || rewritten != original) fail("manifest does not round-trip");

  // Predictions: exact, empty, one appended character, missing; by index mod 4.
  double ned_sum = 0.0;
  std::size_t exact = 0;
  {
    std::ofstream pred(dir / "pred.tsv");
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const auto& r = dataset.records()[i];
      const auto length = static_cast<double>(utf8::length(r.text));
      switch (i % 4) {
        case 0:
          pred << r.filename << '\t' << r.text << '\n';
          ++exact;
          ned_sum += 1.0;
          break;
        case 1:
          pred << r.filename << '\t' << '\n';
          break;
        case 2:
          pred << r.filename << '\t' << r.text << "x\n";
          ned_sum += length / (length + 1.0);
          break;
        default:
          break;
      }
    }
  }
  const double n = static_cast<double>(dataset.size());
  const double want_accuracy = static_cast<double>(exact) / n;
  const double want_ned = ned_sum / n;
  log = run_command(cli + " evaluate --pred " + quoted(dir / "pred.tsv") + " --gt " +
                        quoted(generated / datagen::kManifestName),
                    status);
  double got_accuracy = -1.0, got_ned = -1.0;
  std::size_t got_n = 0;
  if (status != 0 ||
      std::sscanf(log.c_str(), "n=%zu accuracy=%lf mean_norm_ed=%lf", &got_n, &got_accuracy,
                  &got_ned) != 3) {
    return {false, "evaluate failed: " + log};
  }
  // The tool prints six decimals.
  if (got_n != dataset.size() || std::abs(got_accuracy - want_accuracy) > 5e-7 ||
      std::abs(got_ned - want_ned) > 5e-7) {
    fail(fmt("evaluate reported accuracy %.6f ned %.6f, expected %.6f", got_accuracy, got_ned,
             want_accuracy) +
         fmt(" / %.6f", want_ned));
  }
  o.detail += std::to_string(decoded) + " PNGs at height 64, manifest stable, " +
              fmt("accuracy %.6f ned %.6f as computed by hand", got_accuracy, got_ned);
  if (o.pass) fs::remove_all(dir);
  return o;
}

// ---------------------------------------------------------------------------

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "attention ops match scalar oracles", criterion_oracles},
    {2, "analytic gradients match finite differences", criterion_gradients},
    {3, "loss arithmetic and default weights", criterion_loss_arithmetic},
    {4, "losses vanish on identical inputs", criterion_identity_zero},
    {5, "adain output statistics", criterion_adain},
    {6, "zero-offset deformable conv is a convolution", criterion_zero_offset},
    {7, "overfit micro-run", criterion_micro_run},
    {8, "typeface toy training and frozen weights", criterion_typeface},
    {9, "edit distance oracle and examples", criterion_edit_distance},
    {10, "ablation flags remove parameters and branches", criterion_ablations},
    {11, "end-to-end generate and evaluate", criterion_pipeline},
};

}  // namespace

int main(int argc, char** argv) {
  log::set_level(log::Level::kWarn);
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : kCriteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !outcome.pass;
    std::printf("%s %2d %s: %s [%.1fs]\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name,
                outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
