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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stgen {

/// Base of every error raised by the library. Callers that only need to
/// report a failure catch this; callers that recover catch the leaf type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define STGEN_DEFINE_ERROR(Name)        \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  }

// renderer
STGEN_DEFINE_ERROR(EmptyText);
STGEN_DEFINE_ERROR(FontLoadError);
STGEN_DEFINE_ERROR(EmptyCorpus);

class MissingGlyph : public Error {
 public:
  MissingGlyph(char32_t codepoint, const std::string& character);
  char32_t codepoint() const { return codepoint_; }

 private:
  char32_t codepoint_;
};

// tensors and layers
STGEN_DEFINE_ERROR(ShapeMismatch);
STGEN_DEFINE_ERROR(ShapeError);
STGEN_DEFINE_ERROR(InvalidPatchSize);
STGEN_DEFINE_ERROR(InvalidDomain);

// typeface classifier
STGEN_DEFINE_ERROR(InsufficientClasses);
STGEN_DEFINE_ERROR(FrozenWeightsError);

// training
STGEN_DEFINE_ERROR(EmptyBatch);
STGEN_DEFINE_ERROR(ConfigError);
STGEN_DEFINE_ERROR(CheckpointMismatch);
STGEN_DEFINE_ERROR(CheckpointError);

class NonFiniteLoss : public Error {
 public:
  explicit NonFiniteLoss(std::string term);
  const std::string& term() const { return term_; }

 private:
  std::string term_;
};

// datasets
STGEN_DEFINE_ERROR(OutputUnwritable);
STGEN_DEFINE_ERROR(ManifestMissing);
STGEN_DEFINE_ERROR(ImageReadError);
STGEN_DEFINE_ERROR(UnreferencedImage);
STGEN_DEFINE_ERROR(GenerationFailed);

class DanglingReference : public Error {
 public:
  explicit DanglingReference(std::string filename);
  const std::string& filename() const { return filename_; }

 private:
  std::string filename_;
};

class MalformedLine : public Error {
 public:
  MalformedLine(std::size_t line_no, const std::string& why);
  std::size_t line_no() const { return line_no_; }

 private:
  std::size_t line_no_;
};

// evaluation
STGEN_DEFINE_ERROR(BothEmpty);
STGEN_DEFINE_ERROR(EmptyInput);
STGEN_DEFINE_ERROR(InvalidUtf8);

#undef STGEN_DEFINE_ERROR

}  // namespace stgen
