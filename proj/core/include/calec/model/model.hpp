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

#include <memory>

#include "calec/model/config.hpp"
#include "calec/model/csi.hpp"
#include "calec/model/encoder.hpp"
#include "calec/model/generator.hpp"
#include "calec/model/inferrer.hpp"

namespace calec {

// Parameter name prefixes of the trainable groups.
inline constexpr const char* kEmbedPrefix = "embed.";
inline constexpr const char* kBackbonePrefix = "backbone.";
inline constexpr const char* kCsiPrefix = "csi.";
inline constexpr const char* kInferrerPrefix = "inferrer.";
inline constexpr const char* kGeneratorPrefix = "lecg.";

struct EncodedInput {
  JointSequence joint;
  Var backbone;  // O^T
  CsiOutputs csi;
  FusedRepresentation fused;
};

// Every component behind one ParameterStore. Not copyable: the components
// hold handles into the store.
class CalecModel {
 public:
  explicit CalecModel(const ModelConfig& config);
  CalecModel(const CalecModel&) = delete;
  CalecModel& operator=(const CalecModel&) = delete;

  const ModelConfig& config() const { return config_; }
  ParameterStore& params() { return store_; }
  const ParameterStore& params() const { return store_; }

  const InputEmbedder& embedder() const { return embedder_; }
  const Backbone& backbone() const { return backbone_; }
  const ChunkInteractor& csi() const { return csi_; }
  const RelationInferrer& inferrer() const { return inferrer_; }
  const Generator& generator() const { return generator_; }

  // Backbone, CSI and relation inferrer over one input pair.
  EncodedInput encode(const TokenSequence& seq, const ChunkSpans& spans,
                      const RegionSet& regions) const;
  // CSI alone, for alignment pre-training.
  CsiOutputs encode_csi(const TokenSequence& seq, const ChunkSpans& spans,
                        const RegionSet& regions) const;

  // Copies every parameter value from `other` (same config and names).
  void copy_parameters_from(const CalecModel& other);

 private:
  ModelConfig config_;
  ParameterStore store_;
  InputEmbedder embedder_;
  Backbone backbone_;
  ChunkInteractor csi_;
  RelationInferrer inferrer_;
  Generator generator_;
};

}  // namespace calec
