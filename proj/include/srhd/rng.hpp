#pragma once
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace srhd {

/// SplitMix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for substream `stream` of a master seed.  Streams are decorrelated
/// by the SplitMix64 mix of (seed, stream); the per-stream generator is a
/// full-period mt19937_64.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

/// Identifier recorded in output metadata alongside seeds.
inline constexpr const char* kRngDescriptor = "mt19937_64+splitmix64-streams";

/// Standard normal sampler.  Box-Muller on explicit 53-bit uniforms, so the
/// draw sequence is identical across standard library implementations.
class NormalSampler {
public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform_open();
    double u2 = uniform_open();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

private:
  // uniform in (0, 1]; strictly positive so log() is safe
  double uniform_open() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace srhd
