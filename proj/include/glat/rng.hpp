#pragma once

#include "glat/types.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace glat {

// Every random draw in the project comes from this generator. The stream is
// pinned down exactly so that an independent implementation (any language)
// can reproduce it bit for bit:
//
//   state <- state + 0x9E3779B97F4A7C15
//   z     <- state
//   z     <- (z xor (z >> 30)) * 0xBF58476D1CE4E5B9
//   z     <- (z xor (z >> 27)) * 0x94D049BB133111EB
//   out   <- z xor (z >> 31)
//
// uniform01(): out >> 11, scaled by 2^-53                  -> [0, 1)
// normal():    Box-Muller over two consecutive raw draws,
//              u1 = ((out1 >> 11) + 1) * 2^-53 in (0, 1],
//              u2 = (out2 >> 11) * 2^-53       in [0, 1),
//              value = sqrt(-2 ln u1) * cos(2 pi u2)
// below(n):    out mod n
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // One normal draw consumes exactly two raw outputs.
    double normal() {
        const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
        const double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    std::uint64_t below(std::uint64_t n) { return next() % n; }

private:
    std::uint64_t state_;
};

// Child stream `tag` of `seed`: the splitmix output for state
// seed + (tag+1)*0x9E3779B97F4A7C15, i.e. draw tag+1 of a generator seeded
// with `seed`. Used for per-slide, per-epoch and per-class substreams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + (tag + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Fisher-Yates: for i = n-1 .. 1, j = below(i+1), swap(v[i], v[j]).
template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& gen) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i >= 1; --i) {
        const std::size_t j = static_cast<std::size_t>(gen.below(i + 1));
        std::swap(v[i], v[j]);
    }
}

// Row-major fill with normal() * scale.
template <typename Scalar>
void fill_gaussian(MatrixX<Scalar>& m, SplitMix64& gen, Scalar scale) {
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            m(i, j) = static_cast<Scalar>(gen.normal()) * scale;
}

template <typename Scalar>
void fill_gaussian(VectorX<Scalar>& v, SplitMix64& gen, Scalar scale) {
    for (Index i = 0; i < v.size(); ++i)
        v(i) = static_cast<Scalar>(gen.normal()) * scale;
}

}  // namespace glat
