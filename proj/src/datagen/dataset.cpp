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

#include "stgen/datagen/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "stgen/common/errors.hpp"
#include "stgen/common/utf8.hpp"

namespace stgen::datagen {

namespace fs = std::filesystem;

std::string escape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_field(std::string_view text, std::size_t line_no) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out += text[i];
      continue;
    }
    if (++i == text.size()) throw MalformedLine(line_no, "dangling escape");
    switch (text[i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      default: throw MalformedLine(line_no, std::string("unknown escape \\") + text[i]);
    }
  }
  return out;
}

std::string format_manifest_line(const Record& record) {
  return escape_field(record.filename) + '\t' + escape_field(record.text) + '\t' +
         std::to_string(record.label);
}

Record parse_manifest_line(std::string_view line, std::size_t line_no) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  if (fields.size() != 3) {
    throw MalformedLine(line_no, "expected 3 tab-separated fields, found " +
                                     std::to_string(fields.size()));
  }
  Record r;
  r.filename = unescape_field(fields[0], line_no);
  r.text = unescape_field(fields[1], line_no);
  if (r.filename.empty()) throw MalformedLine(line_no, "empty filename");
  if (!utf8::is_valid(r.text)) throw MalformedLine(line_no, "text is not valid UTF-8");
  const std::string label(fields[2]);
  std::size_t used = 0;
  try {
    r.label = std::stoll(label, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != label.size()) {
    throw MalformedLine(line_no, "label '" + label + "' is not an integer");
  }
  return r;
}

// ---------------------------------------------------------------------------

LabeledDataset::LabeledDataset(fs::path root, std::vector<Record> records)
    : root_(std::move(root)), records_(std::move(records)) {}

fs::path LabeledDataset::image_path(std::size_t i) const {
  return root_ / kImageDir / records_.at(i).filename;
}

io::RgbImage LabeledDataset::load_image(std::size_t i) const {
  return io::read_image(image_path(i));
}

LabeledDataset load_dataset(const fs::path& root) {
  const auto manifest = root / kManifestName;
  std::ifstream in(manifest, std::ios::binary);
  if (!in) throw ManifestMissing("no " + std::string(kManifestName) + " in " + root.string());
  std::vector<Record> records;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto record = parse_manifest_line(line, line_no);
    if (!seen.insert(record.filename).second) {
      throw MalformedLine(line_no, "'" + record.filename + "' is listed twice");
    }
    if (!fs::is_regular_file(root / kImageDir / record.filename)) {
      throw DanglingReference(record.filename);
    }
    records.push_back(std::move(record));
  }
  const auto image_dir = root / kImageDir;
  if (fs::is_directory(image_dir)) {
    for (const auto& entry : fs::recursive_directory_iterator(image_dir)) {
      if (!entry.is_regular_file()) continue;
      const auto rel = fs::relative(entry.path(), image_dir).generic_string();
      if (!seen.count(rel)) throw UnreferencedImage("image '" + rel + "' is not in the manifest");
    }
  }
  return LabeledDataset(root, std::move(records));
}

void write_manifest(const fs::path& root, const std::vector<Record>& records) {
  std::error_code ec;
  fs::create_directories(root, ec);
  const auto path = root / kManifestName;
  const auto tmp = root / (std::string(kManifestName) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputUnwritable("cannot write " + path.string());
    for (const auto& r : records) out << format_manifest_line(r) << '\n';
    if (!out.flush()) throw OutputUnwritable("failed writing " + path.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw OutputUnwritable("cannot move manifest into place: " + ec.message());
}

LabeledDataset write_dataset(const fs::path& root, const std::vector<Record>& records,
                             const std::vector<io::RgbImage>& images) {
  if (records.size() != images.size()) {
    throw ShapeMismatch("write_dataset: records and images differ in count");
  }
  std::error_code ec;
  fs::create_directories(root / kImageDir, ec);
  if (ec) throw OutputUnwritable("cannot create " + (root / kImageDir).string());
  for (std::size_t i = 0; i < records.size(); ++i) {
    io::write_png(root / kImageDir / records[i].filename, images[i]);
  }
  write_manifest(root, records);
  return LabeledDataset(root, records);
}

std::vector<fs::path> list_style_images(const fs::path& dir) {
  std::vector<fs::path> paths;
  if (fs::is_regular_file(dir / kManifestName)) {
    const auto data = load_dataset(dir);
    for (std::size_t i = 0; i < data.size(); ++i) paths.push_back(data.image_path(i));
  } else if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      auto ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
      if (entry.is_regular_file() && (ext == ".png" || ext == ".jpg" || ext == ".jpeg")) {
        paths.push_back(entry.path());
      }
    }
    std::sort(paths.begin(), paths.end());
  }
  if (paths.empty()) throw EmptyCorpus("no style images found in " + dir.string());
  return paths;
}

}  // namespace stgen::datagen
