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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stgen/common/errors.hpp"
#include "stgen/common/log.hpp"
#include "stgen/datagen/dataset.hpp"
#include "stgen/datagen/generate.hpp"
#include "stgen/eval/metrics.hpp"
#include "stgen/io/image.hpp"
#include "stgen/renderer/corpus.hpp"
#include "stgen/renderer/font.hpp"
#include "stgen/renderer/render.hpp"
#include "stgen/training/config.hpp"
#include "stgen/training/trainer.hpp"
#include "stgen/typeface/classifier.hpp"

namespace fs = std::filesystem;
using namespace stgen;

namespace {

std::shared_ptr<const renderer::Font> font_or_default(const std::string& path) {
  return renderer::Font::load(path.empty() ? renderer::default_font_path() : fs::path(path));
}

int run_render(const std::string& text, const std::string& font, int height, const fs::path& out) {
  io::write_png(out, renderer::render_text(*font_or_default(font), text, height));
  return 0;
}

struct SynthArgs {
  fs::path corpus, out;
  std::vector<std::string> fonts;
  std::vector<std::int64_t> labels;
  std::size_t count = 100;
  std::uint64_t seed = 0;
  int max_length = 64;
  bool plain = false;
};

int run_synth(const SynthArgs& args) {
  datagen::SynthOptions options;
  for (const auto& f : args.fonts) options.fonts.emplace_back(f);
  if (options.fonts.empty()) options.fonts = renderer::bundled_fonts();
  options.font_labels = args.labels;
  options.count = args.count;
  options.seed = args.seed;
  options.length = {1, args.max_length};
  options.random_colors = !args.plain;
  const auto set = datagen::synthesize(renderer::TextCorpus::from_file(args.corpus), options);
  datagen::write_dataset(args.out, set.records, set.images);
  log::info("wrote ", set.records.size(), " images to ", args.out.string());
  return 0;
}

struct TypefaceArgs {
  fs::path data, out;
  typeface::TypefaceTrainOptions options;
};

int run_train_typeface(const TypefaceArgs& args) {
  const auto dataset = datagen::load_dataset(args.data);
  typeface::FontDataset fonts;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto label = dataset.records()[i].label;
    fonts.images.push_back(io::to_tensor(io::resize_to_height(dataset.load_image(i), 64)));
    fonts.labels.push_back(label);
    fonts.class_count = std::max(fonts.class_count, label + 1);
  }
  auto result = typeface::train_typeface_classifier(
      fonts, args.options, [](const typeface::EpochStats& s) {
        log::info("epoch ", s.epoch, " loss ", s.train_loss, " val_accuracy ", s.val_accuracy);
      });
  typeface::FrozenTypefaceClassifier(std::move(result.net)).save(args.out);
  return 0;
}

struct TrainArgs {
  fs::path config, data, typeface_ckpt, out, corpus, resume;
};

int run_train(const TrainArgs& args) {
  const auto config = training::load_train_config(args.config);
  std::shared_ptr<const typeface::FrozenTypefaceClassifier> classifier;
  if (config.typeface_loss) {
    if (args.typeface_ckpt.empty()) {
      throw ConfigError("typeface_loss is on; pass --typeface-ckpt or set typeface_loss = false");
    }
    classifier = std::make_shared<const typeface::FrozenTypefaceClassifier>(
        typeface::FrozenTypefaceClassifier::load(args.typeface_ckpt));
  }
  const auto dataset = datagen::load_dataset(args.data);
  const auto samples = training::load_training_samples(dataset, config.model.num_domains);
  renderer::TextCorpus corpus;
  if (!args.corpus.empty()) {
    corpus = renderer::TextCorpus::from_file(args.corpus);
  } else {
    std::vector<std::string> labels;
    for (const auto& r : dataset.records()) labels.push_back(r.text);
    corpus = renderer::TextCorpus(std::move(labels));
  }
  training::Trainer trainer(config, classifier);
  if (!args.resume.empty()) {
    trainer.load_checkpoint(args.resume);
    log::info("resumed at step ", trainer.step());
  }
  training::FitOptions options;
  options.out_dir = args.out;
  options.on_step = [](const losses::LossReport& r) {
    if (r.step % 50 == 0) {
      log::info("step ", r.step, " img ", r.img, " adv_d ", r.adv_d, " adv_g ", r.adv_g);
    }
  };
  const auto result = training::fit(trainer, samples, corpus, options);
  log::info("trained ", result.steps, " steps");
  return 0;
}

struct GenerateArgs {
  fs::path ckpt, styles, texts, out, font;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::int64_t domain = 1;
};

int run_generate(const GenerateArgs& args) {
  datagen::GenerateRequest request;
  request.styles = fs::is_directory(args.styles) ? datagen::list_style_images(args.styles)
                                                 : std::vector<fs::path>{args.styles};
  request.texts = renderer::TextCorpus::from_file(args.texts);
  request.n = args.n;
  request.out_dir = args.out;
  request.seed = args.seed;
  request.domain = args.domain;
  request.font = args.font;
  const auto dataset = datagen::generate_dataset(args.ckpt, request);
  log::info("wrote ", dataset.size(), " images to ", args.out.string());
  return 0;
}

int run_evaluate(const fs::path& pred, const fs::path& gt) {
  std::cout << eval::evaluate(eval::join_prediction_files(pred, gt)).to_string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scene text generation for low-resource languages"};
  app.require_subcommand(1);

  std::string text, font;
  int height = 64;
  fs::path render_out;
  auto* render = app.add_subcommand("render", "Render text as a content image");
  render->add_option("--text", text, "UTF-8 text")->required();
  render->add_option("--font", font, "TrueType font (default: bundled sans)");
  render->add_option("--height", height, "Canvas height")->check(CLI::PositiveNumber);
  render->add_option("--out", render_out, "Output PNG")->required();

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Render a labeled word-image dataset");
  synth->add_option("--corpus", synth_args.corpus, "Text corpus, one entry per line")->required();
  synth->add_option("--fonts", synth_args.fonts, "Fonts (default: all bundled)");
  synth->add_option("--labels", synth_args.labels, "Label per font (default: font index)");
  synth->add_option("--count", synth_args.count, "Number of images");
  synth->add_option("--seed", synth_args.seed);
  synth->add_option("--max-length", synth_args.max_length, "Longest entry in code points");
  synth->add_flag("--plain", synth_args.plain, "Black text on grey instead of random colours");
  synth->add_option("--out", synth_args.out, "Output dataset directory")->required();

  TypefaceArgs typeface_args;
  auto& tf = typeface_args.options;
  auto* train_typeface =
      app.add_subcommand("train-typeface", "Train the font classifier (label column = font id)");
  train_typeface->add_option("--data", typeface_args.data, "Dataset directory")->required();
  train_typeface->add_option("--epochs", tf.epochs);
  train_typeface->add_option("--batch-size", tf.batch_size);
  train_typeface->add_option("--lr", tf.lr);
  train_typeface->add_option("--seed", tf.seed);
  train_typeface->add_option("--base-channels", tf.base_channels);
  train_typeface->add_option("--fc-dim", tf.fc_dim);
  train_typeface->add_option("--val-fraction", tf.val_fraction);
  train_typeface->add_option("--out", typeface_args.out, "Classifier checkpoint")->required();

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train the generator");
  train->add_option("--config", train_args.config, "key = value config (STGEN_<KEY> overrides)");
  train->add_option("--data", train_args.data, "Dataset directory (label column = domain)")
      ->required();
  train->add_option("--typeface-ckpt", train_args.typeface_ckpt, "Classifier checkpoint");
  train->add_option("--corpus", train_args.corpus, "Random-text corpus (default: dataset labels)");
  train->add_option("--resume", train_args.resume, "Training checkpoint to continue from");
  train->add_option("--out", train_args.out, "Checkpoint directory")->required();

  GenerateArgs generate_args;
  auto* generate = app.add_subcommand("generate", "Write a synthetic labeled dataset");
  generate->add_option("--ckpt", generate_args.ckpt, "Generator or training checkpoint")
      ->required();
  generate->add_option("--styles", generate_args.styles, "Style image or directory")->required();
  generate->add_option("--texts", generate_args.texts, "Text corpus file")->required();
  generate->add_option("--n", generate_args.n, "Number of images")->required();
  generate->add_option("--seed", generate_args.seed);
  generate->add_option("--domain", generate_args.domain, "Label written to the manifest");
  generate->add_option("--font", generate_args.font, "Content font");
  generate->add_option("--out", generate_args.out, "Output dataset directory")->required();

  fs::path pred, gt;
  auto* evaluate = app.add_subcommand("evaluate", "Word accuracy and normalized edit distance");
  evaluate->add_option("--pred", pred, "filename<TAB>prediction lines")->required();
  evaluate->add_option("--gt", gt, "filename<TAB>text lines")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (render->parsed()) return run_render(text, font, height, render_out);
    if (synth->parsed()) return run_synth(synth_args);
    if (train_typeface->parsed()) return run_train_typeface(typeface_args);
    if (train->parsed()) return run_train(train_args);
    if (generate->parsed()) return run_generate(generate_args);
    if (evaluate->parsed()) return run_evaluate(pred, gt);
  } catch (const stgen::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
