// Copyright 2026 The suctionq Authors
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


#include <set>

#include <gtest/gtest.h>

#include "suctionq/common.hpp"

namespace suctionq {
namespace {

TEST(Seeds, DerivedSeedsAreDeterministic) {
  EXPECT_EQ(derive_seed(7, "scene"), derive_seed(7, "scene"));
  EXPECT_EQ(derive_seed(7, "scene", 3), derive_seed(7, "scene", 3));
}

TEST(Seeds, StreamsSeedsAndIndicesSeparate) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    for (const char* stream : {"scene", "exploration", "replay", "init"}) {
      for (std::uint64_t index : {0u, 1u, 2u}) {
        EXPECT_TRUE(seen.insert(derive_seed(seed, stream, index)).second);
      }
    }
  }
}

TEST(Seeds, Fnv1aKnownValues) {
  // Published FNV-1a 64-bit test vectors.
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ULL);
}

TEST(Seeds, SplitMixKnownValue) {
  // First output of the reference splitmix64 generator seeded with 0.
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Hex, FixedWidthLowercase) {
  EXPECT_EQ(to_hex(0), "0000000000000000");
  EXPECT_EQ(to_hex(0xdeadbeefULL), "00000000deadbeef");
}

}  // namespace
}  // namespace suctionq
