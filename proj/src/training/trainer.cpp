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

#include "stgen/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "stgen/common/errors.hpp"
#include "stgen/common/hash.hpp"
#include "stgen/common/log.hpp"
#include "stgen/common/utf8.hpp"
#include "stgen/networks/checkpoint.hpp"
#include "stgen/renderer/render.hpp"

namespace stgen::training {

namespace {

constexpr int kHeight = networks::kImageHeight;

torch::Tensor stack_resized(const std::vector<io::RgbImage>& images, int width) {
  std::vector<torch::Tensor> xs;
  xs.reserve(images.size());
  for (const auto& image : images) xs.push_back(io::to_tensor(io::resize(image, kHeight, width)));
  return torch::stack(xs);
}

torch::Tensor stack_content(const std::vector<std::string>& texts, const renderer::Font& font,
                            int width) {
  std::vector<torch::Tensor> xs;
  xs.reserve(texts.size());
  for (const auto& text : texts) {
    const auto content = renderer::render_content(text, kHeight, font);
    xs.push_back(io::resize_tensor(content.pixels, kHeight, width));
  }
  return torch::stack(xs);
}

bool is_norm_parameter(const std::string& name) {
  return name.find("norm") != std::string::npos || name.find("bn") != std::string::npos;
}

// Splits named parameters into (decayed, exempt) according to the config.
std::pair<std::vector<torch::Tensor>, std::vector<torch::Tensor>> split_decay(
    const std::vector<std::pair<std::string, torch::Tensor>>& named, bool decay_norm_params) {
  std::vector<torch::Tensor> decayed, exempt;
  for (const auto& [name, p] : named) {
    (!decay_norm_params && is_norm_parameter(name) ? exempt : decayed).push_back(p);
  }
  return {decayed, exempt};
}

std::vector<std::pair<std::string, torch::Tensor>> named(
    std::initializer_list<std::pair<std::string, const torch::nn::Module*>> modules) {
  std::vector<std::pair<std::string, torch::Tensor>> out;
  for (const auto& [prefix, module] : modules) {
    for (const auto& item : module->named_parameters()) {
      out.emplace_back(prefix + "." + item.key(), item.value());
    }
  }
  return out;
}

template <class Optimizer, class Options>
std::unique_ptr<Optimizer> make_optimizer(
    const std::vector<std::pair<std::string, torch::Tensor>>& params, const Options& base,
    bool decay_norm_params) {
  auto [decayed, exempt] = split_decay(params, decay_norm_params);
  // Group options equal to a constructor default are replaced by the
  // optimizer defaults, so the defaults carry the exempt decay of zero.
  auto defaults = base;
  defaults.weight_decay(0.0);
  std::vector<torch::optim::OptimizerParamGroup> groups;
  groups.emplace_back(decayed, std::make_unique<Options>(base));
  if (!exempt.empty()) groups.emplace_back(exempt, std::make_unique<Options>(defaults));
  return std::make_unique<Optimizer>(std::move(groups), defaults);
}

void check_finite(const char* term, const torch::Tensor& value) {
  if (!std::isfinite(value.item<double>())) throw NonFiniteLoss(term);
}

double item(const torch::Tensor& t) { return t.defined() ? t.item<double>() : 0.0; }

void set_requires_grad(torch::nn::Module& module, bool on) {
  for (auto& p : module.parameters()) p.requires_grad_(on);
}

}  // namespace

TrainingBatch make_batch(const std::vector<const TrainingSample*>& samples,
                         const renderer::TextCorpus& corpus, const renderer::Font& font,
                         std::mt19937_64& rng) {
  if (samples.empty()) throw EmptyBatch("cannot build a batch from no samples");
  if (corpus.empty()) throw EmptyCorpus("random content needs a nonempty text corpus");
  std::vector<int> widths;
  std::vector<io::RgbImage> images;
  TrainingBatch batch;
  std::vector<std::int64_t> domains;
  for (const auto* sample : samples) {
    if (sample->image.empty()) throw EmptyBatch("training sample has an empty image");
    const auto scaled_width = static_cast<int>(
        std::lround(static_cast<double>(sample->image.cols) * kHeight / sample->image.rows));
    widths.push_back(std::max(1, scaled_width));
    images.push_back(sample->image);
    batch.labels.push_back(sample->text);
    domains.push_back(sample->domain);
  }
  const int width = io::batch_width(widths);
  std::size_t max_len = 1;
  for (const auto& entry : corpus.entries()) max_len = std::max(max_len, utf8::length(entry));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    batch.content2_texts.push_back(renderer::sample_random_text(
        corpus, {1, static_cast<int>(max_len)}, rng));
  }
  batch.style = stack_resized(images, width);
  batch.domains = torch::tensor(domains, torch::kInt64);
  batch.content1 = stack_content(batch.labels, font, width);
  batch.content2 = stack_content(batch.content2_texts, font, width);
  return batch;
}

std::vector<TrainingSample> load_training_samples(const datagen::LabeledDataset& data,
                                                  std::int64_t num_domains) {
  std::vector<TrainingSample> samples;
  samples.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& record = data.records()[i];
    if (record.label < 0 || record.label >= num_domains) {
      throw InvalidDomain(record.filename + " has domain " + std::to_string(record.label) +
                          " outside [0, " + std::to_string(num_domains) + ")");
    }
    samples.push_back({io::resize_to_height(data.load_image(i), kHeight), record.text,
                       record.label});
  }
  return samples;
}

std::mt19937_64 step_rng(std::int64_t seed, std::int64_t step) {
  std::seed_seq seq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(step),
                    std::uint64_t{0x5eed}};
  return std::mt19937_64(seq);
}

// ---------------------------------------------------------------------------

Trainer::Trainer(const TrainConfig& config,
                 std::shared_ptr<const typeface::FrozenTypefaceClassifier> classifier)
    : config_(config), classifier_(std::move(classifier)) {
  config_.validate();
  if (config_.typeface_loss && !classifier_) {
    throw ConfigError("typeface_loss is on but no typeface classifier was given");
  }
  torch::manual_seed(static_cast<std::uint64_t>(config_.seed));
  generator_ = networks::Generator(config_.model);
  discriminator_ =
      networks::Discriminator(config_.model.base_channels, config_.model.num_domains);
  generator_->train();
  discriminator_->train();

  const auto& g = *generator_;
  auto adam = torch::optim::AdamOptions(config_.lr)
                  .betas({config_.adam_beta1, config_.adam_beta2})
                  .weight_decay(config_.weight_decay);
  auto rmsprop = torch::optim::RMSpropOptions(config_.lr)
                     .alpha(config_.rmsprop_alpha)
                     .weight_decay(config_.weight_decay);
  style_opt_ = make_optimizer<torch::optim::Adam>(
      named({{"style_encoder", g.style_encoder.get()}, {"mapping", g.mapping.get()}}), adam,
      config_.decay_norm_params);
  content_opt_ = make_optimizer<torch::optim::RMSprop>(
      named({{"content_encoder", g.content_encoder.get()},
             {"decoder", g.decoder.get()},
             {"attention", g.attention.get()}}),
      rmsprop, config_.decay_norm_params);
  disc_opt_ = make_optimizer<torch::optim::Adam>(
      named({{"discriminator", discriminator_.get()}}), adam, config_.decay_norm_params);
}

losses::LossReport Trainer::train_step(const TrainingBatch& batch) {
  const auto& w = config_.weights;
  const auto n = batch.style.size(0);
  const auto both_domains = torch::cat({batch.domains, batch.domains});
  losses::LossReport report;
  report.step = step_ + 1;

  // Both content branches share the style of their sample.
  const auto style_vec = generator_->encode_style(batch.style);
  auto params = generator_->map_style(style_vec);
  for (std::size_t i = 0; i < params.size(); ++i) {
    params.gamma[i] = torch::cat({params.gamma[i], params.gamma[i]});
    params.beta[i] = torch::cat({params.beta[i], params.beta[i]});
  }
  const auto content = torch::cat({batch.content1, batch.content2});
  const auto content_features = generator_->encode_content(content);
  const auto generated = generator_->decode(content_features, params);

  // Discriminator update.
  disc_opt_->zero_grad();
  const auto adv_d = losses::hinge_d_loss(discriminator_(batch.style, batch.domains),
                                          discriminator_(generated.detach(), both_domains));
  const auto r1 = losses::r1_penalty(
      [&](const torch::Tensor& x) { return discriminator_(x, batch.domains); }, batch.style,
      w.gamma_r1);
  const auto total_d = adv_d + r1;
  check_finite("adv_d", adv_d);
  check_finite("r1", r1);
  total_d.backward();
  disc_opt_->step();

  // Generator update.
  set_requires_grad(*discriminator_, false);
  losses::GeneratorLossParts parts;
  parts.adv = losses::hinge_g_loss(discriminator_(generated, both_domains));
  set_requires_grad(*discriminator_, true);
  const auto out1 = generated.narrow(0, 0, n);
  const auto out2 = generated.narrow(0, n, n);
  parts.img = losses::reconstruction_loss(out1, batch.style);
  const auto recoded = generator_->encode_content(generated);
  if (config_.content_loss_levels == "all") {
    parts.cnt = (losses::content_consistency_loss(content_features.low, recoded.low) +
                 losses::content_consistency_loss(content_features.high, recoded.high) +
                 losses::content_consistency_loss(content_features.top, recoded.top)) /
                3.0;
  } else {
    parts.cnt = losses::content_consistency_loss(content_features.top, recoded.top);
  }
  if (config_.typeface_loss) {
    typeface::StyleFeatures target;
    {
      torch::NoGradGuard no_grad;
      target = classifier_->extract_features(batch.style);
    }
    const auto fake = classifier_->extract_features(generated);
    auto half = [&](std::int64_t start) {
      typeface::StyleFeatures part;
      for (const auto& m : fake.layer_maps) part.layer_maps.push_back(m.narrow(0, start, n));
      part.embedding = fake.embedding.narrow(0, start, n);
      part.logits = fake.logits.narrow(0, start, n);
      return part;
    };
    parts.sty1 = losses::style_alignment_terms(target, half(0), w).total;
    parts.sty2 = losses::style_alignment_terms(target, half(n), w).total;
  }
  const auto total_g = losses::total_generator_loss(parts, w);
  check_finite("adv_g", parts.adv);
  check_finite("img", parts.img);
  check_finite("cnt", parts.cnt);
  if (parts.sty1.defined()) check_finite("sty1", parts.sty1);
  if (parts.sty2.defined()) check_finite("sty2", parts.sty2);
  style_opt_->zero_grad();
  content_opt_->zero_grad();
  total_g.backward();
  style_opt_->step();
  content_opt_->step();

  report.adv_d = item(adv_d);
  report.r1 = item(r1);
  report.total_d = item(total_d);
  report.adv_g = item(parts.adv);
  report.img = item(parts.img);
  report.cnt = item(parts.cnt);
  report.sty1 = item(parts.sty1);
  report.sty2 = item(parts.sty2);
  report.total_g = item(total_g);
  ++step_;
  return report;
}

std::uint64_t Trainer::parameter_hash() const {
  std::uint64_t h = kFnvOffset;
  for (const auto* module :
       {static_cast<const torch::nn::Module*>(generator_.get()),
        static_cast<const torch::nn::Module*>(discriminator_.get())}) {
    for (const auto& p : module->parameters()) h = fnv1a(p, h);
    for (const auto& b : module->buffers()) h = fnv1a(b, h);
  }
  return h;
}

namespace {

template <class Optimizer>
void save_optimizer(torch::serialize::OutputArchive& archive, const std::string& key,
                    const Optimizer& optimizer) {
  torch::serialize::OutputArchive sub;
  optimizer.save(sub);
  archive.write(key, sub);
}

template <class Optimizer>
void load_optimizer(torch::serialize::InputArchive& archive, const std::string& key,
                    Optimizer& optimizer) {
  torch::serialize::InputArchive sub;
  try {
    archive.read(key, sub);
    optimizer.load(sub);
  } catch (const c10::Error& e) {
    throw CheckpointMismatch("optimizer state '" + key + "' does not fit: " + e.what_without_backtrace());
  }
}

}  // namespace

void Trainer::save_checkpoint(const std::filesystem::path& path) const {
  torch::serialize::OutputArchive archive;
  const auto model = config_.model.describe();
  networks::write_header(archive, {networks::kCheckpointVersion, "training", model,
                                   config_.model.fingerprint()});
  archive.write("train_config", c10::IValue(config_.describe()));
  archive.write("step", c10::IValue(step_));
  networks::save_module(archive, "generator", *generator_);
  networks::save_module(archive, "discriminator", *discriminator_);
  save_optimizer(archive, "style_optimizer", *style_opt_);
  save_optimizer(archive, "content_optimizer", *content_opt_);
  save_optimizer(archive, "discriminator_optimizer", *disc_opt_);
  networks::save_archive(archive, path);
}

void Trainer::load_checkpoint(const std::filesystem::path& path) {
  torch::serialize::InputArchive archive;
  networks::load_archive(archive, path);
  const auto header = networks::read_header(archive);
  if (header.kind != "training") {
    throw CheckpointMismatch(path.string() + " holds a '" + header.kind +
                             "' checkpoint, not a training state");
  }
  if (header.fingerprint != config_.model.fingerprint()) {
    throw CheckpointMismatch(path.string() + " was written for a different generator configuration");
  }
  c10::IValue step;
  if (!archive.try_read("step", step)) throw CheckpointError(path.string() + " has no step entry");
  networks::load_module(archive, "generator", *generator_);
  networks::load_module(archive, "discriminator", *discriminator_);
  load_optimizer(archive, "style_optimizer", *style_opt_);
  load_optimizer(archive, "content_optimizer", *content_opt_);
  load_optimizer(archive, "discriminator_optimizer", *disc_opt_);
  step_ = step.toInt();
}

// ---------------------------------------------------------------------------

FitResult fit(Trainer& trainer, const std::vector<TrainingSample>& data,
              const renderer::TextCorpus& corpus, const FitOptions& options) {
  const auto& config = trainer.config();
  FitResult result;
  if (config.epochs == 0) return result;
  if (data.empty()) throw EmptyBatch("training set is empty");
  const auto font = renderer::Font::load(
      config.content_font.empty() ? renderer::default_font_path()
                                  : std::filesystem::path(config.content_font));

  const auto batch = static_cast<std::size_t>(config.batch_size);
  const auto per_epoch = static_cast<std::int64_t>((data.size() + batch - 1) / batch);
  auto total = per_epoch * config.epochs;
  if (config.max_steps > 0) total = std::min(total, config.max_steps);

  std::ofstream log_file;
  const bool write = !options.out_dir.empty();
  if (write) {
    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    log_file.open(options.out_dir / "train_log.jsonl", std::ios::app);
    if (!log_file) {
      throw OutputUnwritable("cannot write training log in " + options.out_dir.string());
    }
  }

  double best_img = std::numeric_limits<double>::infinity();
  double epoch_img = 0.0;
  std::int64_t epoch_steps = 0;
  std::vector<std::size_t> order;
  std::int64_t order_epoch = -1;

  while (trainer.step() < total) {
    const auto step = trainer.step();
    const auto epoch = step / per_epoch;
    const auto offset = static_cast<std::size_t>(step % per_epoch) * batch;
    if (epoch != order_epoch) {
      order.resize(data.size());
      std::iota(order.begin(), order.end(), 0);
      std::seed_seq seq{static_cast<std::uint64_t>(config.seed), static_cast<std::uint64_t>(epoch)};
      std::mt19937_64 shuffle_rng(seq);
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      order_epoch = epoch;
    }
    std::vector<const TrainingSample*> samples;
    for (auto i = offset; i < std::min(offset + batch, data.size()); ++i) {
      samples.push_back(&data[order[i]]);
    }
    auto rng = step_rng(config.seed, step);
    const auto report = trainer.train_step(make_batch(samples, corpus, *font, rng));
    ++result.steps;
    epoch_img += report.img;
    ++epoch_steps;
    if (write) log_file << report.to_json() << '\n' << std::flush;
    if (options.on_step) options.on_step(report);

    const bool epoch_done = trainer.step() % per_epoch == 0 || trainer.step() == total;
    if (epoch_done && write) {
      const auto finished = (trainer.step() + per_epoch - 1) / per_epoch;
      if (finished % config.checkpoint_every == 0) {
        char name[32];
        std::snprintf(name, sizeof name, "epoch_%04lld.ckpt", static_cast<long long>(finished));
        trainer.save_checkpoint(options.out_dir / name);
        result.checkpoints.push_back(options.out_dir / name);
      }
      const auto mean_img = epoch_img / static_cast<double>(epoch_steps);
      if (mean_img < best_img) {
        best_img = mean_img;
        trainer.save_checkpoint(options.out_dir / "best.ckpt");
        result.best = options.out_dir / "best.ckpt";
      }
      log::info("epoch ", finished, " step ", trainer.step(), " mean img ", mean_img);
    }
    if (epoch_done) {
      epoch_img = 0.0;
      epoch_steps = 0;
    }
  }
  if (write) {
    trainer.save_checkpoint(options.out_dir / "last.ckpt");
    result.checkpoints.push_back(options.out_dir / "last.ckpt");
  }
  return result;
}

}  // namespace stgen::training
