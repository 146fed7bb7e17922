// Copyright 2026 The CALeC Authors.
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

#include <stdexcept>
#include <string>

namespace calec {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CALEC_DEFINE_ERROR(Name)          \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

CALEC_DEFINE_ERROR(ShapeError);
CALEC_DEFINE_ERROR(DegenerateMaskError);
CALEC_DEFINE_ERROR(IndexError);
CALEC_DEFINE_ERROR(NumericError);
CALEC_DEFINE_ERROR(VocabError);
CALEC_DEFINE_ERROR(TaggingError);
CALEC_DEFINE_ERROR(SpanError);
CALEC_DEFINE_ERROR(ConfigError);
CALEC_DEFINE_ERROR(DataError);
CALEC_DEFINE_ERROR(StagingError);
CALEC_DEFINE_ERROR(CheckpointError);
CALEC_DEFINE_ERROR(EmptyLabelError);

#undef CALEC_DEFINE_ERROR

}  // namespace calec
