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

#include "calec/decoding/beam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "calec/errors.hpp"
#include "calec/numerics/params.hpp"

namespace calec {

namespace {

// Indices of the top_k largest entries with positive mass, in id order.
std::vector<int> top_k_support(std::span<const double> p, int top_k) {
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  std::vector<int> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return p[static_cast<size_t>(a)] > p[static_cast<size_t>(b)]; });
  if (order.size() > static_cast<size_t>(top_k)) order.resize(static_cast<size_t>(top_k));
  std::erase_if(order, [&](int i) { return !(p[static_cast<size_t>(i)] > 0.0); });
  std::sort(order.begin(), order.end());
  return order;
}

int draw(std::span<const double> p, const std::vector<int>& support, std::mt19937_64& rng) {
  double total = 0.0;
  for (int i : support) total += p[static_cast<size_t>(i)];
  const double u = unit_uniform(rng) * total;
  double acc = 0.0;
  for (int i : support) {
    acc += p[static_cast<size_t>(i)];
    if (u < acc) return i;
  }
  return support.back();
}

DecodeResult run(const StepFn& step, const std::vector<int>& prefix, const DecodeConfig& config,
                 int eos_id, const std::function<bool(int)>* in_constraint) {
  config.validate();
  if (prefix.empty()) throw DataError("decoding needs a non-empty prefix");
  std::mt19937_64 rng(config.seed);
  const double lambda = in_constraint ? config.lambda : 1.0;

  DecodeResult result;
  std::vector<Beam> beams{Beam{prefix, 0.0, false}};
  for (int t = 0; t < config.max_length; ++t) {
    DecodeStep record;
    record.beams = beams;
    for (size_t b = 0; b < beams.size(); ++b) {
      const Beam& beam = beams[b];
      if (beam.finished) {
        record.candidates.push_back({-1, -1, 0.0, beam, false});
        continue;
      }
      const std::vector<double> probs = step(beam.sent);
      for (int token : top_k_sample_distinct(probs, config.top_k, config.samples(), rng)) {
        Candidate c;
        c.parent = static_cast<int>(b);
        c.token = token;
        c.log_prob = std::log(probs[static_cast<size_t>(token)]);
        c.beam.sent = beam.sent;
        c.beam.sent.push_back(token);
        c.beam.score = beam.score + c.log_prob;
        c.beam.finished = token == eos_id;
        if (in_constraint && (*in_constraint)(token)) {
          c.beam.score *= lambda;
          c.adjusted = true;
        }
        record.candidates.push_back(std::move(c));
      }
    }
    std::vector<size_t> order(record.candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return record.candidates[a].beam.score > record.candidates[b].beam.score;
    });
    beams.clear();
    for (size_t i = 0; i < order.size() && beams.size() < static_cast<size_t>(config.beam_size); ++i) {
      beams.push_back(record.candidates[order[i]].beam);
    }
    record.kept = beams;
    result.trace.push_back(std::move(record));
    if (std::all_of(beams.begin(), beams.end(), [](const Beam& b) { return b.finished; })) break;
  }
  result.beams = beams;
  result.sentence = beams.front().sent;
  return result;
}

}  // namespace

void DecodeConfig::validate(int vocab_size) const {
  if (beam_size < 1) throw ConfigError("beam size must be >= 1");
  if (sample_size < 0) throw ConfigError("sample size must be >= 1 (0 = beam size)");
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  if (vocab_size > 0 && top_k > vocab_size) throw ConfigError("top_k exceeds the vocabulary");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in (0, 1]");
  if (max_length < 1) throw ConfigError("max length must be >= 1");
}

int top_k_sample_step(std::span<const double> p, int top_k, std::mt19937_64& rng) {
  auto support = top_k_support(p, top_k);
  if (support.empty()) throw NumericError("sampling from a distribution with no mass");
  return draw(p, support, rng);
}

std::vector<int> top_k_sample_distinct(std::span<const double> p, int top_k, int count,
                                       std::mt19937_64& rng) {
  auto support = top_k_support(p, top_k);
  std::vector<int> out;
  while (static_cast<int>(out.size()) < count && !support.empty()) {
    int id = draw(p, support, rng);
    out.push_back(id);
    std::erase(support, id);
  }
  return out;
}

DecodeResult beam_sample(const StepFn& step, const std::vector<int>& prefix,
                         const DecodeConfig& config, int eos_id) {
  return run(step, prefix, config, eos_id, nullptr);
}

DecodeResult constrained_beam_sample(const StepFn& step, const std::vector<int>& prefix,
                                     const std::function<bool(int)>& in_constraint,
                                     const DecodeConfig& config, int eos_id) {
  return run(step, prefix, config, eos_id, &in_constraint);
}

DecodeResult constrained_beam_sample(const StepFn& step, const std::vector<int>& prefix,
                                     const ConstraintState& constraints,
                                     const DecodeConfig& config, int eos_id) {
  std::function<bool(int)> member = [&constraints](int id) { return constraints.contains(id); };
  return run(step, prefix, config, eos_id, &member);
}

std::uint64_t record_seed(std::uint64_t seed, const std::string& record_id) {
  std::uint64_t h = 1469598103934665603ULL ^ seed;
  for (unsigned char c : record_id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace calec
