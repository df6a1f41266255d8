//
// Copyright 2026 The tpmkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "gtest/gtest.h"
#include "support/child_process.h"

namespace tpmkit {
namespace {

TEST(StreamingMemoryTest, HighDimensionalRunStaysUnderCeiling) {
  const absl::StatusOr<testing::ChildResult> run =
      testing::RunChild(TPMKIT_MEMORY_PROBE);
  ASSERT_TRUE(run.ok()) << run.status();
  EXPECT_EQ(run->exit_code, 0);
  const absl::StatusOr<long> peak = testing::PeakRssKib(run->output);
  ASSERT_TRUE(peak.ok()) << peak.status();
  EXPECT_GT(*peak, 0);
  EXPECT_LE(*peak, 64 * 1024);
}

}  // namespace
}  // namespace tpmkit
