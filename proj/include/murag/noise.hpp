// Copyright 2026 The murag Authors
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

#ifndef MURAG_NOISE_HPP_
#define MURAG_NOISE_HPP_

#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <random>

namespace murag {

// Anything that can hand out uniform draws in the open interval (0, 1) and
// tell whether it is running in noiseless (testing) mode.
template <typename T>
concept UniformSource = requires(T& source, const T& const_source) {
  { source.Uniform() } -> std::convertible_to<double>;
  { const_source.noiseless() } -> std::convertible_to<bool>;
};

inline constexpr std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Maps 64 random bits to the open interval (0, 1): midpoints of a 2^-52 grid,
// so both ends are exactly representable and never reached.
inline constexpr double BitsToOpenUnit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

// Seeded randomness. mt19937_64 is fully specified by the standard and the
// uniform conversion above is done by hand, so a given (seed, stream id)
// produces the same draws on every conforming platform.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed, std::uint64_t stream_id = 0,
                       bool noiseless = false)
      : seed_(seed),
        stream_id_(stream_id),
        noiseless_(noiseless),
        engine_(SplitMix64(seed ^ SplitMix64(stream_id + 0x5851F42D4C957F2DULL))) {}

  double Uniform() { return BitsToOpenUnit(engine_()); }
  std::uint64_t Bits() { return engine_(); }

  // Standard normal via Box-Muller, two uniforms per draw.
  double Gaussian() {
    const double u1 = Uniform();
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Child stream keyed by (this stream, child id).
  NoiseSource Substream(std::uint64_t stream_id) const {
    return NoiseSource(seed_, SplitMix64(stream_id_ ^ SplitMix64(~stream_id)), noiseless_);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  bool noiseless() const { return noiseless_; }
  void set_noiseless(bool noiseless) { noiseless_ = noiseless; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  bool noiseless_;
  std::mt19937_64 engine_;
};

static_assert(UniformSource<NoiseSource>);

}  // namespace murag

#endif  // MURAG_NOISE_HPP_
