#pragma once

#include <cstdint>
#include <random>

namespace posat {

/// Uniform double in [0, 1) from the top 53 bits; identical across standard libraries.
inline double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform_draw(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit_draw(rng); }

}  // namespace posat
