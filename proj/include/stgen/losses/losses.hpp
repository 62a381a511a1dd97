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

#include <functional>
#include <string>

#include <torch/torch.h>

#include "stgen/typeface/classifier.hpp"

namespace stgen::losses {

struct LossWeights {
  double lambda1 = 1.0;     // perceptual
  double lambda2 = 250.0;   // texture (Gram)
  double lambda3 = 1.0;     // embedding
  double lambda_cnt = 1.0;
  double lambda_img = 10.0;
  double lambda_sty1 = 1.0;
  double lambda_sty2 = 0.1;
  double gamma_r1 = 10.0;

  template <class F>
  void for_each_field(F&& f) {
    f("lambda1", lambda1);
    f("lambda2", lambda2);
    f("lambda3", lambda3);
    f("lambda_cnt", lambda_cnt);
    f("lambda_img", lambda_img);
    f("lambda_sty1", lambda_sty1);
    f("lambda_sty2", lambda_sty2);
    f("gamma_r1", gamma_r1);
  }
  /// Throws ConfigError on a negative weight.
  void validate() const;
};

struct LossReport {
  std::int64_t step = 0;
  double adv_d = 0.0;
  double adv_g = 0.0;
  double r1 = 0.0;
  double cnt = 0.0;
  double img = 0.0;
  double sty1 = 0.0;
  double sty2 = 0.0;
  double total_g = 0.0;
  double total_d = 0.0;

  std::string to_json() const;
  static LossReport from_json(const std::string& line);
};

/// mean(relu(1 - real)) + mean(relu(1 + fake)).
torch::Tensor hinge_d_loss(const torch::Tensor& real_scores, const torch::Tensor& fake_scores);

/// -mean(fake).
torch::Tensor hinge_g_loss(const torch::Tensor& fake_scores);

using ScoreFn = std::function<torch::Tensor(const torch::Tensor&)>;

/// (gamma / 2) * mean over the batch of ||d score_b / d x_b||^2. `score`
/// maps [B, ...] images to [B] scores; the graph is kept so the penalty can
/// be backpropagated into the scorer.
torch::Tensor r1_penalty(const ScoreFn& score, const torch::Tensor& real_images, double gamma);

/// Mean absolute difference. Throws ShapeMismatch.
torch::Tensor content_consistency_loss(const torch::Tensor& z_c, const torch::Tensor& recoded);
torch::Tensor reconstruction_loss(const torch::Tensor& generated, const torch::Tensor& target);

/// [C, H, W] -> [C, C] or [B, C, H, W] -> [B, C, C], normalized by C*H*W.
torch::Tensor gram_matrix(const torch::Tensor& features);

struct StyleTerms {
  torch::Tensor perceptual;  // sum over layers of mean |delta phi_i|
  torch::Tensor texture;     // mean over layers of mean |delta Gram_i|
  torch::Tensor embedding;   // mean |delta psi|
  torch::Tensor total;       // weighted by lambda1..3
};

/// Style alignment between a style image batch and a generated batch of the
/// same shape. Throws ShapeMismatch.
StyleTerms style_alignment_terms(const torch::Tensor& style_image, const torch::Tensor& generated,
                                 const typeface::FrozenTypefaceClassifier& classifier,
                                 const LossWeights& weights);

/// Same as above on precomputed features of the style image.
StyleTerms style_alignment_terms(const typeface::StyleFeatures& style,
                                 const typeface::StyleFeatures& generated,
                                 const LossWeights& weights);

torch::Tensor style_alignment_loss(const torch::Tensor& style_image,
                                   const torch::Tensor& generated,
                                   const typeface::FrozenTypefaceClassifier& classifier,
                                   const LossWeights& weights);

struct GeneratorLossParts {
  torch::Tensor adv;
  torch::Tensor img;
  torch::Tensor cnt;
  torch::Tensor sty1;
  torch::Tensor sty2;
};

/// adv + lambda_img img + lambda_cnt cnt + lambda_sty1 sty1 + lambda_sty2
/// sty2, accumulated in double precision. Undefined parts count as 0.
torch::Tensor total_generator_loss(const GeneratorLossParts& parts, const LossWeights& weights);

}  // namespace stgen::losses
