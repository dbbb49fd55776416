/*
 * Copyright 2026 The fedaug Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDAUG_RNG_HPP_
#define FEDAUG_RNG_HPP_

#include <cstdint>
#include <limits>
#include <string_view>
#include <utility>

namespace fedaug {

// Counter-based random stream. Output k of a stream is a pure function of
// (seed, stream_id, k), so streams can be split by name and handed to worker
// threads without any shared state. Copying a stream copies its position.
//
// Satisfies UniformRandomBitGenerator so it can drive <random> distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t position() const { return counter_; }

  // Child stream, independent of this one and of siblings with other tags.
  // Does not advance `this`.
  RngStream derive(std::uint64_t tag) const;
  RngStream derive(std::string_view name) const;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  // Box-Muller; consumes exactly two draws.
  double normal(double mean, double stddev);
  double gamma(double shape);

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Draw from U(lo, hi) and return it together with the advanced stream.
// Throws ValueError if lo > hi.
std::pair<double, RngStream> rng_uniform(RngStream stream, double lo,
                                         double hi);

// 64-bit FNV-1a, used to turn stream names into tags.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace fedaug

#endif  // FEDAUG_RNG_HPP_
