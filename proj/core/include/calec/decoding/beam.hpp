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

// Beam sample and constrained beam sample.
//
// Each step, every live beam draws `sample_size` distinct continuations from
// its top-k truncated next-token distribution; candidate score = beam score +
// log P(token). In the constrained variant a candidate whose newest token is
// in the constraint set has its score multiplied by lambda. Scores are sums
// of log-probabilities, hence <= 0, so lambda < 1 moves them toward zero and
// favours constraint hits. Candidates are ranked (stable, highest first) and
// the top `beam_size` survive. Finished beams are carried unchanged.

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "calec/model/generator.hpp"

namespace calec {

struct DecodeConfig {
  int beam_size = 5;
  int sample_size = 0;  // 0 means "same as beam_size"
  int top_k = 32;
  int max_length = 20;  // generated tokens, prefix excluded
  double lambda = 0.86;
  std::uint64_t seed = 1234;

  int samples() const { return sample_size > 0 ? sample_size : beam_size; }
  // Throws ConfigError; vocab_size <= 0 skips the top-k bound.
  void validate(int vocab_size = 0) const;
};

struct Beam {
  std::vector<int> sent;
  double score = 0.0;
  bool finished = false;
};

// Next-token distribution for a partial sentence (prefix included).
using StepFn = std::function<std::vector<double>(std::span<const int>)>;

// Keeps the top_k most probable entries (ties to the lower id), renormalizes
// and draws one id.
int top_k_sample_step(std::span<const double> p, int top_k, std::mt19937_64& rng);

// `count` distinct draws from the renormalized top-k distribution. Returns
// fewer ids when fewer than `count` entries carry mass.
std::vector<int> top_k_sample_distinct(std::span<const double> p, int top_k, int count,
                                       std::mt19937_64& rng);

struct Candidate {
  int parent = -1;  // beam index in the previous step, -1 for a carried beam
  int token = -1;
  double log_prob = 0.0;
  Beam beam;
  bool adjusted = false;  // lambda applied this step
};

struct DecodeStep {
  std::vector<Beam> beams;  // live set entering the step
  std::vector<Candidate> candidates;
  std::vector<Beam> kept;
};

struct DecodeResult {
  std::vector<int> sentence;  // beams[0].sent
  std::vector<Beam> beams;
  std::vector<DecodeStep> trace;
};

DecodeResult beam_sample(const StepFn& step, const std::vector<int>& prefix,
                         const DecodeConfig& config, int eos_id);

// `in_constraint` decides membership of a token id in S.
DecodeResult constrained_beam_sample(const StepFn& step, const std::vector<int>& prefix,
                                     const std::function<bool(int)>& in_constraint,
                                     const DecodeConfig& config, int eos_id);

DecodeResult constrained_beam_sample(const StepFn& step, const std::vector<int>& prefix,
                                     const ConstraintState& constraints,
                                     const DecodeConfig& config, int eos_id);

// Seed for an independent per-record stream.
std::uint64_t record_seed(std::uint64_t seed, const std::string& record_id);

}  // namespace calec
