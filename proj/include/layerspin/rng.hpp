/* Copyright 2026 The Layerspin Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef LAYERSPIN_RNG_HPP_
#define LAYERSPIN_RNG_HPP_

#include <cstdint>
#include <random>
#include <span>

#include "layerspin/tensor.hpp"

namespace layerspin {

/// Seeded generator with platform-independent draws.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The std distributions are not (libstdc++ and libc++ differ), so
/// uniform, normal and shuffle are implemented here on top of raw 64-bit
/// draws:
///   uniform01  = (draw >> 11) * 2^-53
///   below(n)   = Lemire's multiply-shift with rejection
///   normal     = Box-Muller, cosine branch only
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  std::uint64_t below(std::uint64_t n);
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Independent stream for a named purpose (init, shuffling, ...).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// fan_in x fan_out matrix, uniform in +-sqrt(6 / (fan_in + fan_out)).
Dense glorot_uniform_init(Rng& rng, std::size_t fan_in, std::size_t fan_out);

}  // namespace layerspin

#endif  // LAYERSPIN_RNG_HPP_
