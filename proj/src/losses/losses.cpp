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

#include "stgen/losses/losses.hpp"

#include <sstream>

#include <json.hpp>

#include "stgen/common/errors.hpp"

namespace stgen::losses {

namespace {

void require_same_shape(const torch::Tensor& a, const torch::Tensor& b, const char* who) {
  if (a.sizes() != b.sizes()) {
    std::ostringstream os;
    os << who << ": shapes differ, " << a.sizes() << " vs " << b.sizes();
    throw ShapeMismatch(os.str());
  }
}

}  // namespace

void LossWeights::validate() const {
  const_cast<LossWeights*>(this)->for_each_field([](std::string_view name, double v) {
    if (v < 0.0) throw ConfigError("loss weight " + std::string(name) + " must be >= 0");
  });
}

std::string LossReport::to_json() const {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["adv_d"] = adv_d;
  j["adv_g"] = adv_g;
  j["r1"] = r1;
  j["cnt"] = cnt;
  j["img"] = img;
  j["sty1"] = sty1;
  j["sty2"] = sty2;
  j["total_g"] = total_g;
  j["total_d"] = total_d;
  return j.dump();
}

LossReport LossReport::from_json(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  LossReport r;
  r.step = j.at("step").get<std::int64_t>();
  r.adv_d = j.at("adv_d").get<double>();
  r.adv_g = j.at("adv_g").get<double>();
  r.r1 = j.at("r1").get<double>();
  r.cnt = j.at("cnt").get<double>();
  r.img = j.at("img").get<double>();
  r.sty1 = j.at("sty1").get<double>();
  r.sty2 = j.at("sty2").get<double>();
  r.total_g = j.at("total_g").get<double>();
  r.total_d = j.at("total_d").get<double>();
  return r;
}

torch::Tensor hinge_d_loss(const torch::Tensor& real_scores, const torch::Tensor& fake_scores) {
  return torch::relu(1.0 - real_scores).mean() + torch::relu(1.0 + fake_scores).mean();
}

torch::Tensor hinge_g_loss(const torch::Tensor& fake_scores) { return -fake_scores.mean(); }

torch::Tensor r1_penalty(const ScoreFn& score, const torch::Tensor& real_images, double gamma) {
  auto x = real_images.detach().requires_grad_(true);
  const auto scores = score(x);
  if (!scores.requires_grad()) return torch::zeros({}, real_images.options());
  const auto grad = torch::autograd::grad({scores.sum()}, {x}, /*grad_outputs=*/{},
                                          /*retain_graph=*/true, /*create_graph=*/true,
                                          /*allow_unused=*/true)[0];
  if (!grad.defined()) return torch::zeros({}, real_images.options());
  return 0.5 * gamma * grad.pow(2).flatten(1).sum(1).mean();
}

torch::Tensor content_consistency_loss(const torch::Tensor& z_c, const torch::Tensor& recoded) {
  require_same_shape(z_c, recoded, "content_consistency_loss");
  return (z_c - recoded).abs().mean();
}

torch::Tensor reconstruction_loss(const torch::Tensor& generated, const torch::Tensor& target) {
  require_same_shape(generated, target, "reconstruction_loss");
  return (generated - target).abs().mean();
}

torch::Tensor gram_matrix(const torch::Tensor& features) {
  const bool batched = features.dim() == 4;
  const auto f = batched ? features : features.unsqueeze(0);
  const auto b = f.size(0), c = f.size(1), hw = f.size(2) * f.size(3);
  const auto flat = f.reshape({b, c, hw});
  const auto g = torch::bmm(flat, flat.transpose(1, 2)) / static_cast<double>(c * hw);
  return batched ? g : g.squeeze(0);
}

StyleTerms style_alignment_terms(const typeface::StyleFeatures& style,
                                 const typeface::StyleFeatures& generated,
                                 const LossWeights& weights) {
  if (style.layer_maps.size() != generated.layer_maps.size()) {
    throw ShapeMismatch("style_alignment: feature layer counts differ");
  }
  StyleTerms t;
  t.perceptual = torch::zeros({}, generated.embedding.options());
  t.texture = torch::zeros({}, generated.embedding.options());
  for (std::size_t i = 0; i < style.layer_maps.size(); ++i) {
    const auto& a = style.layer_maps[i];
    const auto& b = generated.layer_maps[i];
    require_same_shape(a, b, "style_alignment");
    t.perceptual = t.perceptual + (a - b).abs().mean();
    t.texture = t.texture + (gram_matrix(a) - gram_matrix(b)).abs().mean();
  }
  t.texture = t.texture / static_cast<double>(std::max<std::size_t>(style.layer_maps.size(), 1));
  require_same_shape(style.embedding, generated.embedding, "style_alignment");
  t.embedding = (style.embedding - generated.embedding).abs().mean();
  t.total = weights.lambda1 * t.perceptual + weights.lambda2 * t.texture +
            weights.lambda3 * t.embedding;
  return t;
}

StyleTerms style_alignment_terms(const torch::Tensor& style_image, const torch::Tensor& generated,
                                 const typeface::FrozenTypefaceClassifier& classifier,
                                 const LossWeights& weights) {
  require_same_shape(style_image, generated, "style_alignment");
  return style_alignment_terms(classifier.extract_features(style_image),
                               classifier.extract_features(generated), weights);
}

torch::Tensor style_alignment_loss(const torch::Tensor& style_image,
                                   const torch::Tensor& generated,
                                   const typeface::FrozenTypefaceClassifier& classifier,
                                   const LossWeights& weights) {
  return style_alignment_terms(style_image, generated, classifier, weights).total;
}

torch::Tensor total_generator_loss(const GeneratorLossParts& parts, const LossWeights& weights) {
  auto total = torch::zeros({}, torch::kFloat64);
  auto add = [&](const torch::Tensor& part, double w) {
    if (part.defined()) total = total + w * part.to(torch::kFloat64);
  };
  add(parts.adv, 1.0);
  add(parts.img, weights.lambda_img);
  add(parts.cnt, weights.lambda_cnt);
  add(parts.sty1, weights.lambda_sty1);
  add(parts.sty2, weights.lambda_sty2);
  return total;
}

}  // namespace stgen::losses
