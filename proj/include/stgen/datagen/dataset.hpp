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
#include <string>
#include <string_view>
#include <vector>

#include "stgen/io/image.hpp"

namespace stgen::datagen {

inline constexpr const char* kManifestName = "labels.tsv";
inline constexpr const char* kImageDir = "images";

/// One manifest line: image file (relative to images/), transcription and
/// an integer label (domain id, or font id for classifier data).
struct Record {
  std::string filename;
  std::string text;
  std::int64_t label = 0;
  bool operator==(const Record&) const = default;
};

/// Escapes '\\', tab and newline as \\\\, \\t and \\n.
std::string escape_field(std::string_view text);
/// Inverse of escape_field. Throws MalformedLine on a dangling or unknown
/// escape.
std::string unescape_field(std::string_view text, std::size_t line_no);

std::string format_manifest_line(const Record& record);
/// Throws MalformedLine(line_no) unless the line has exactly three fields,
/// a nonempty filename, valid UTF-8 text and an integer label.
Record parse_manifest_line(std::string_view line, std::size_t line_no);

/// Validated on-disk dataset; iteration order is manifest order.
class LabeledDataset {
 public:
  LabeledDataset(std::filesystem::path root, std::vector<Record> records);

  const std::filesystem::path& root() const { return root_; }
  const std::vector<Record>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  std::filesystem::path image_path(std::size_t i) const;
  io::RgbImage load_image(std::size_t i) const;

 private:
  std::filesystem::path root_;
  std::vector<Record> records_;
};

/// Throws ManifestMissing, MalformedLine (including duplicate filenames),
/// DanglingReference (naming the missing file) and UnreferencedImage.
LabeledDataset load_dataset(const std::filesystem::path& root);

/// Writes labels.tsv atomically. Throws OutputUnwritable.
void write_manifest(const std::filesystem::path& root, const std::vector<Record>& records);

/// Writes images/<filename> for every record and the manifest.
/// Throws OutputUnwritable.
LabeledDataset write_dataset(const std::filesystem::path& root, const std::vector<Record>& records,
                             const std::vector<io::RgbImage>& images);

/// Style images from a directory: a labeled dataset when labels.tsv exists,
/// otherwise every .png / .jpg file in sorted order. Throws EmptyCorpus.
std::vector<std::filesystem::path> list_style_images(const std::filesystem::path& dir);

}  // namespace stgen::datagen
