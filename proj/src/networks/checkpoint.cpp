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

#include "stgen/networks/checkpoint.hpp"

#include <fstream>

#include "stgen/common/errors.hpp"
#include "stgen/common/hash.hpp"

namespace stgen::networks {

void write_header(torch::serialize::OutputArchive& archive, const CheckpointHeader& header) {
  archive.write("format_version", c10::IValue(header.version));
  archive.write("kind", c10::IValue(header.kind));
  archive.write("config", c10::IValue(header.config));
  archive.write("fingerprint", c10::IValue(static_cast<std::int64_t>(header.fingerprint)));
}

CheckpointHeader read_header(torch::serialize::InputArchive& archive) {
  CheckpointHeader header;
  c10::IValue v;
  auto need = [&](const char* key) {
    if (!archive.try_read(key, v)) {
      throw CheckpointError(std::string("checkpoint is missing '") + key + "'");
    }
  };
  need("format_version");
  header.version = v.toInt();
  if (header.version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(header.version));
  }
  need("kind");
  header.kind = v.toStringRef();
  need("config");
  header.config = v.toStringRef();
  need("fingerprint");
  header.fingerprint = static_cast<std::uint64_t>(v.toInt());
  if (fnv1a(header.config) != header.fingerprint) {
    throw CheckpointError("checkpoint config does not match its fingerprint");
  }
  return header;
}

void save_module(torch::serialize::OutputArchive& archive, const std::string& key,
                 const torch::nn::Module& module) {
  torch::serialize::OutputArchive sub;
  module.save(sub);
  archive.write(key, sub);
}

void load_module(torch::serialize::InputArchive& archive, const std::string& key,
                 torch::nn::Module& module) {
  torch::serialize::InputArchive sub;
  if (!archive.try_read(key, sub)) {
    throw CheckpointMismatch("checkpoint has no '" + key + "' section");
  }
  try {
    module.load(sub);
  } catch (const c10::Error& e) {
    throw CheckpointMismatch("'" + key + "' does not match the model: " + e.msg());
  }
}

void save_archive(torch::serialize::OutputArchive& archive, const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw OutputUnwritable("cannot write checkpoint " + path.string());
    try {
      archive.save_to(out);
    } catch (const c10::Error& e) {
      throw OutputUnwritable("failed writing checkpoint " + path.string() + ": " + e.msg());
    }
    if (!out.flush()) throw OutputUnwritable("failed writing checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw OutputUnwritable("cannot move checkpoint into place: " + ec.message());
}

void load_archive(torch::serialize::InputArchive& archive, const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw CheckpointError("checkpoint not found: " + path.string());
  }
  try {
    archive.load_from(path.string());
  } catch (const c10::Error& e) {
    throw CheckpointError("cannot read checkpoint " + path.string() + ": " + e.msg());
  }
}

void save_generator(const std::filesystem::path& path, Generator& generator) {
  torch::serialize::OutputArchive archive;
  const auto config = generator->config().describe();
  write_header(archive, {kCheckpointVersion, "generator", config, fnv1a(config)});
  save_module(archive, "generator", *generator);
  save_archive(archive, path);
}

Generator load_generator(const std::filesystem::path& path, const GeneratorConfig* expected,
                         attention::Backend backend) {
  torch::serialize::InputArchive archive;
  load_archive(archive, path);
  const auto header = read_header(archive);
  if (expected != nullptr && expected->fingerprint() != header.fingerprint) {
    throw CheckpointMismatch("checkpoint " + path.string() +
                             " was written for a different generator configuration");
  }
  auto config = GeneratorConfig::parse(header.config);
  config.backend = backend;
  Generator generator(config);
  load_module(archive, "generator", *generator);
  generator->eval();
  return generator;
}

}  // namespace stgen::networks
