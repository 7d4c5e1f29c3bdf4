#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace eate {

/// 64-bit finalizer with full avalanche (splitmix64 constants).
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of replication `rep` in cell `cell`: mix64(mix64(mix64(master) ^ cell) ^ rep).
constexpr std::uint64_t stream_key(std::uint64_t master, std::uint64_t cell,
                                   std::uint64_t rep) noexcept {
  return mix64(mix64(mix64(master) ^ cell) ^ rep);
}

/// FNV-1a over the bytes of a label.
constexpr std::uint64_t label_id(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Deterministic random stream owned by one worker.
class Stream {
 public:
  using Engine = std::mt19937_64;

  explicit Stream(std::uint64_t seed) : engine_(seed) {}
  Stream(std::uint64_t master, std::uint64_t cell, std::uint64_t rep)
      : engine_(stream_key(master, cell, rep)) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  bool bernoulli(double p) { return uniform() < p; }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double lognormal() { return std::lognormal_distribution<double>(0.0, 1.0)(engine_); }
  std::uint64_t bits() { return engine_(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  Engine& engine() noexcept { return engine_; }

 private:
  Engine engine_;
};

}  // namespace eate
