#pragma once

#include <cstdint>
#include <initializer_list>

namespace gaitvib {

/// SplitMix64 finalizer. Used to derive independent child seeds from a
/// parent seed and a tuple of indices so that every trial, split and model
/// initialisation can be regenerated in isolation.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = mix_seed(parent);
  for (auto p : path) s = mix_seed(s ^ mix_seed(p + 0x632be59bd9b4e019ULL));
  return s;
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
template <class Engine>
double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace gaitvib
