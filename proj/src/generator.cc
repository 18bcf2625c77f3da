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

#include "mcrelax/generator.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <stdexcept>

namespace mcrelax {

namespace {

// mt19937_64 output is fixed by the standard, the std:: distributions are
// not; draw reals directly from the raw 64-bit stream.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  double Uniform(double lo, double hi) {
    const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
  }
  // Integer in [lo, hi].
  int Int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(engine_() % span);
  }
  bool Coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr double kPriceLo = 1.0, kPriceHi = 100.0;
constexpr double kQtyLo = 5.0, kQtyHi = 50.0;

std::vector<double> BlockProfile(Sampler& rng, int horizon) {
  const int len = rng.Int(2, horizon);
  const int start = rng.Int(0, horizon - len);
  const double sign = rng.Coin() ? 1.0 : -1.0;
  std::vector<double> profile(horizon, 0.0);
  for (int t = start; t < start + len; ++t) {
    profile[t] = sign * rng.Uniform(kQtyLo, kQtyHi);
  }
  return profile;
}

}  // namespace

GroupCounts CountsFor(Group group) {
  switch (group) {
    case Group::kG1: return {2, 4, 4, 2};
    case Group::kG2: return {2, 4, 4, 4};
    case Group::kG3: return {2, 8, 8, 2};
    case Group::kG4: return {2, 8, 8, 8};
    case Group::kG5: return {4, 4, 4, 4};
  }
  throw std::invalid_argument("unknown group");
}

Group ParseGroup(std::string_view tag) {
  std::string t(tag);
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (t == "G1") return Group::kG1;
  if (t == "G2") return Group::kG2;
  if (t == "G3") return Group::kG3;
  if (t == "G4") return Group::kG4;
  if (t == "G5") return Group::kG5;
  throw std::invalid_argument("unknown group tag '" + std::string(tag) + "'");
}

std::string ToString(Group group) {
  return "G" + std::to_string(static_cast<int>(group) + 1);
}

Instance Generate(Group group, int horizon, std::uint64_t seed) {
  if (horizon < 2) throw std::invalid_argument("horizon must be >= 2");
  const GroupCounts counts = CountsFor(group);
  Sampler rng(SplitMix(SplitMix(seed) ^
                       (static_cast<std::uint64_t>(group) << 32) ^
                       static_cast<std::uint64_t>(horizon)));

  Instance inst;
  inst.horizon = horizon;
  inst.seed = seed;
  inst.group_tag = ToString(group);

  const int n_demand = counts.elementary / 2;
  for (int i = 0; i < counts.elementary; ++i) {
    ElementaryOrder e;
    e.id = "E" + std::to_string(i);
    const double sign = i < n_demand ? 1.0 : -1.0;
    for (int t = 0; t < horizon; ++t) {
      e.quantities.push_back(sign * rng.Uniform(kQtyLo, kQtyHi));
      e.prices.push_back(rng.Uniform(kPriceLo, kPriceHi));
    }
    if (i == counts.elementary - 1) {
      double peak = 0.0;
      for (double q : e.quantities) peak = std::max(peak, std::abs(q));
      e.load_gradient = LoadGradient{0.4 * peak, 0.4 * peak};
    }
    inst.elementary.push_back(std::move(e));
  }

  const int n_blocks = counts.regular_blocks + counts.profile_blocks;
  for (int b = 0; b < n_blocks; ++b) {
    BlockOrder blk;
    const bool profile = b >= counts.regular_blocks;
    blk.id = (profile ? "PB" : "RB") +
             std::to_string(profile ? b - counts.regular_blocks : b);
    blk.profile = BlockProfile(rng, horizon);
    blk.price = rng.Uniform(kPriceLo, kPriceHi);
    blk.is_profile_block = profile;
    blk.min_ratio = profile ? rng.Uniform(0.2, 0.8) : 1.0;
    if (!profile && b < counts.regular_blocks / 2) blk.exclusive_group = 0;
    inst.blocks.push_back(std::move(blk));
  }
  if (counts.profile_blocks >= 2) {
    inst.blocks.back().parents.push_back(
        inst.blocks[counts.regular_blocks].id);
  }

  for (int i = 0; i < counts.flexible; ++i) {
    FlexibleBid f;
    f.id = "F" + std::to_string(i);
    const double sign = rng.Coin() ? 1.0 : -1.0;
    f.quantity = sign * rng.Uniform(kQtyLo, kQtyHi);
    f.price = rng.Uniform(kPriceLo, kPriceHi);
    inst.flexible.push_back(std::move(f));
  }
  inst.Validate();
  return inst;
}

}  // namespace mcrelax
