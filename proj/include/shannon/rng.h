// Copyright 2026 The shannon-eval Authors.
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

#ifndef SHANNON_RNG_H_
#define SHANNON_RNG_H_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace shannon {

// Seeded generator whose output sequence is identical on every platform:
// std::mt19937_64 is fully specified, the standard distributions are not, so
// bounded draws use rejection sampling on the raw engine output.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform in [0, n). n must be positive.
  uint64_t below(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

  // Uniform permutation of 0..n-1 without fixed points (rejection), n >= 2.
  std::vector<size_t> derangement(size_t n) {
    std::vector<size_t> perm(n);
    for (;;) {
      for (size_t i = 0; i < n; ++i) perm[i] = i;
      shuffle(perm);
      bool fixed = false;
      for (size_t i = 0; i < n && !fixed; ++i) fixed = perm[i] == i;
      if (!fixed) return perm;
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace shannon

#endif  // SHANNON_RNG_H_
