// Copyright 2026 The wmbench Authors
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
// -----------------------------------------------------------------------------
//
// Every random stream is derived from one run seed: the FNV-1a hash of the
// stage name and the item index are mixed in through SplitMix64.

#ifndef WMBENCH_SEEDING_HPP_
#define WMBENCH_SEEDING_HPP_

#include <cstdint>
#include <string_view>

namespace wmbench {

inline constexpr std::uint64_t Fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline constexpr std::uint64_t Mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t StageSeed(std::uint64_t run_seed,
                                         std::string_view stage,
                                         std::uint64_t index = 0) {
  return Mix64(Mix64(run_seed ^ Fnv1a64(stage)) + index);
}

}  // namespace wmbench

#endif  // WMBENCH_SEEDING_HPP_
