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

#include "fedaug/rng.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "fedaug/error.hpp"

namespace fedaug {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Stafford's variant 13 finalizer (the SplitMix64 output function).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      key_(mix64(mix64(seed + kGolden) ^ (stream_id * 0xd1b54a32d192ed03ULL +
                                          0x8cb92ba72f3d8dd7ULL))) {}

RngStream RngStream::derive(std::uint64_t tag) const {
  return RngStream(seed_, mix64(stream_id_ ^ mix64(tag + kGolden)));
}

RngStream RngStream::derive(std::string_view name) const {
  return derive(fnv1a64(name));
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(mix64(key_ + counter_ * kGolden) ^ key_);
}

double RngStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  if (lo > hi) throw ValueError("uniform: lo > hi");
  if (lo == hi) {
    next_u64();
    return lo;
  }
  return lo + (hi - lo) * uniform01();
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw ValueError("uniform_index: n must be > 0");
  const unsigned __int128 wide =
      static_cast<unsigned __int128>(next_u64()) * n;
  return static_cast<std::uint64_t>(wide >> 64);
}

double RngStream::normal(double mean, double stddev) {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::gamma(double shape) {
  if (!(shape > 0.0)) throw ValueError("gamma: shape must be > 0");
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(*this);
}

std::pair<double, RngStream> rng_uniform(RngStream stream, double lo,
                                         double hi) {
  const double v = stream.uniform(lo, hi);
  return {v, stream};
}

}  // namespace fedaug
