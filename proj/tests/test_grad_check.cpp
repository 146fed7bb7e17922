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

#include <gtest/gtest.h>

#include "calec/pipeline/grad_check.hpp"

namespace calec {
namespace {

// Central differences at epsilon 1e-5 on losses of order 10 carry roughly
// 1e-10 of roundoff, so coordinates whose true gradient is below ~1e-6 are
// checked through the floored ratio.
constexpr double kRelativeTolerance = 1e-4;

TEST(ModelGradCheck, FixtureInstanceWithinRelativeTolerance) {
  const ModelGradCheck r = run_grad_checks(GradCheckInstance{});
  EXPECT_LT(r.alignment.max_relative_error, kRelativeTolerance) << r.alignment.worst_parameter;
  EXPECT_LT(r.stage1.max_relative_error, kRelativeTolerance) << r.stage1.worst_parameter;
  EXPECT_LT(r.stage2.max_relative_error, kRelativeTolerance) << r.stage2.worst_parameter;
  EXPECT_GT(r.stage2.coordinates, 1000u);
}

class GradCheckSeeds : public ::testing::TestWithParam<int> {};

TEST_P(GradCheckSeeds, AnalyticMatchesNumeric) {
  GradCheckInstance instance;
  instance.seed = static_cast<std::uint64_t>(GetParam());
  const ModelGradCheck r = run_grad_checks(instance);
  EXPECT_LT(r.alignment.max_relative_error, kRelativeTolerance) << r.alignment.worst_parameter;
  EXPECT_LT(r.stage1.max_relative_error, kRelativeTolerance) << r.stage1.worst_parameter;
  for (const GradCheckReport* report : {&r.alignment, &r.stage1, &r.stage2}) {
    EXPECT_LT(report->max_floored_error, kRelativeTolerance);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, GradCheckSeeds, ::testing::Values(2, 3, 7, 9, 11));

}  // namespace
}  // namespace calec
