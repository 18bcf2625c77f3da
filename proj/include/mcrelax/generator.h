// Copyright 2026 The mcrelax Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Seeded synthetic instance generator with the five size presets G1..G5.

#ifndef MCRELAX_GENERATOR_H_
#define MCRELAX_GENERATOR_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "mcrelax/market.h"

namespace mcrelax {

enum class Group { kG1, kG2, kG3, kG4, kG5 };

struct GroupCounts {
  int elementary = 0;
  int regular_blocks = 0;
  int profile_blocks = 0;
  int flexible = 0;

  int PerPeriodTotal() const {
    return elementary + regular_blocks + profile_blocks + flexible;
  }
};

GroupCounts CountsFor(Group group);

// Accepts "G1".."G5" (case-insensitive). Throws std::invalid_argument.
Group ParseGroup(std::string_view tag);
std::string ToString(Group group);

// Deterministic for fixed (group, horizon, seed). Throws std::invalid_argument
// when horizon < 2.
//
// Distributions: prices U[1, 100]; quantity magnitudes U[5, 50]; half of the
// elementary orders are demand, half supply; the last supply order carries
// load-gradient limits of 40% of its largest per-period quantity; block
// profiles cover a random contiguous window of >= 2 periods; profile-block
// min ratios U[0.2, 0.8]; one exclusive group over half of the regular
// blocks; the last profile block is a child of the first when there are at
// least two profile blocks.
Instance Generate(Group group, int horizon, std::uint64_t seed);

}  // namespace mcrelax

#endif  // MCRELAX_GENERATOR_H_
