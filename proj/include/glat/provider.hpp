#pragma once

#include "glat/embedding.hpp"
#include "glat/types.hpp"

#include <cstdint>
#include <string>

namespace glat {

/// Fixed query/key/value projections of the foundation-model scorer.
/// Fully determined by (seed, d, d_k, d_v); never touched by any optimizer.
struct FrozenProjections {
    Matrix Wq;  // d x d_k
    Matrix Wk;  // d x d_k
    Matrix Wv;  // d x d_v
    std::uint64_t seed = 0;
    int d_k = 0;
    int d_v = 0;

    int d() const { return static_cast<int>(Wq.rows()); }
};

/// Entries are normal with standard deviation 1/sqrt(d), drawn from one
/// SplitMix64 stream seeded with `seed`, filling Wq, then Wk, then Wv,
/// each in row-major order.
FrozenProjections make_frozen_projections(std::uint64_t seed, int d, int d_k, int d_v);

enum class ProviderKind { Passthrough, RandomProjection };

ProviderKind provider_kind_from_string(const std::string& s);
std::string to_string(ProviderKind kind);

/// Stand-in for the local feature extractor. `passthrough` hands ingested
/// vectors through unchanged; `random-projection` multiplies by a seeded
/// d x out_dim matrix.
struct FeatureProviderSpec {
    ProviderKind kind = ProviderKind::Passthrough;
    std::uint64_t seed = 0;
    int out_dim = 1;
};

/// The projection matrix used by `random-projection`: entries normal with
/// standard deviation 1/sqrt(d), single stream from spec.seed, row-major.
Matrix provider_projection(const FeatureProviderSpec& spec, int d);

EmbeddingTable local_extract(const FeatureProviderSpec& spec, const EmbeddingTable& table);

}  // namespace glat
