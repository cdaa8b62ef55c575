#pragma once

#include "glat/rng.hpp"

namespace glat::seeds {

/// Purpose roots keep derive_seed streams from colliding when one base seed
/// feeds several components (slide generation, selection shuffles, splits,
/// epoch shuffles, model init). Per-item seeds come from
/// derive_seed(<root>(seed), index).
inline std::uint64_t synth_root(std::uint64_t seed) { return derive_seed(seed, 0); }
inline std::uint64_t selection_root(std::uint64_t seed) { return derive_seed(seed, 1); }
inline std::uint64_t split_root(std::uint64_t seed) { return derive_seed(seed, 2); }
inline std::uint64_t epoch_root(std::uint64_t seed) { return derive_seed(seed, 3); }
inline std::uint64_t model_root(std::uint64_t seed) { return derive_seed(seed, 4); }

}  // namespace glat::seeds
