// Copyright 2026 The mixedrand Authors.
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

// Counter-based random streams and error types shared by every module.

#ifndef MIXEDRAND_RANDOM_HPP_
#define MIXEDRAND_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mixedrand {

// Raised when an iterative numerical routine fails (e.g. power iteration
// does not converge). The CLI maps it to exit code 4.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for unreadable / unwritable files. The CLI maps it to exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// FNV-1a, used to turn stream names into stable 64-bit tags.
inline constexpr std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Derives the key of a child stream from a parent key and a (tag, index)
// pair. Distinct (tag, index) pairs give statistically independent keys.
inline constexpr std::uint64_t derive_key(std::uint64_t parent,
                                          std::uint64_t tag,
                                          std::uint64_t index = 0) {
  return splitmix64(splitmix64(parent ^ splitmix64(tag)) + index);
}

// A random-access stream: the k-th value is a pure function of (key, k).
// Draw order therefore never affects the values other draws see, which is
// what makes replicate- and cluster-level results reproducible regardless of
// how the work is scheduled.
class CounterStream {
 public:
  constexpr explicit CounterStream(std::uint64_t key = 0) : key_(key) {}

  constexpr std::uint64_t key() const { return key_; }

  constexpr std::uint64_t bits(std::uint64_t index) const {
    return splitmix64(key_ ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform(std::uint64_t index) const {
    return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1); safe to take logs of.
  double open_uniform(std::uint64_t index) const {
    return (static_cast<double>(bits(index) >> 11) + 0.5) * 0x1.0p-53;
  }

  double operator()(std::uint64_t index) const { return uniform(index); }

  CounterStream child(std::string_view name, std::uint64_t index = 0) const {
    return CounterStream(derive_key(key_, hash_name(name), index));
  }

 private:
  std::uint64_t key_;
};

// Sequential adaptor over a CounterStream for code that just wants "the next
// number" (generators, shuffles). Satisfies UniformRandomBitGenerator.
class SequentialRng {
 public:
  using result_type = std::uint64_t;

  explicit SequentialRng(CounterStream stream) : stream_(stream) {}
  explicit SequentialRng(std::uint64_t seed) : stream_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return stream_.bits(counter_++); }

  double uniform() { return stream_.uniform(counter_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("below(0)");
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % bound;
  }

 private:
  CounterStream stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace mixedrand

#endif  // MIXEDRAND_RANDOM_HPP_
