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

// JSON instance documents. Reals are written as decimal strings with 17
// significant digits so that a write/read cycle is bit-exact.
//
//   {
//     "horizon": 2, "seed": 0, "group": "G1",
//     "elementary": [{"id": "E0", "quantities": ["10", ...],
//                     "prices": [...], "load_gradient": {"up": "..",
//                     "down": ".."} | null}],
//     "blocks": [{"id": "RB0", "profile": [...], "price": "..",
//                 "min_ratio": "1", "is_profile_block": false,
//                 "exclusive_group": 0 | null, "parents": ["PB0"]}],
//     "flexible": [{"id": "F0", "quantity": "..", "price": ".."}]
//   }

#ifndef MCRELAX_INSTANCE_IO_H_
#define MCRELAX_INSTANCE_IO_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "mcrelax/market.h"

namespace mcrelax {

std::string InstanceToJson(const Instance& instance);
// Throws std::invalid_argument on malformed documents.
Instance InstanceFromJson(const std::string& text);

void SaveInstance(const Instance& instance, const std::string& path);
Instance LoadInstance(const std::string& path);

// Formats a double with 17 significant digits.
std::string ExactDecimal(double value);

// 64-bit FNV-1a, used for content-addressed caching.
std::uint64_t Fnv1a64(std::string_view data);
std::string HexDigest(std::uint64_t hash);

}  // namespace mcrelax

#endif  // MCRELAX_INSTANCE_IO_H_
