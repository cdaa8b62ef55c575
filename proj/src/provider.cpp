#include "glat/provider.hpp"

#include "glat/error.hpp"
#include "glat/rng.hpp"

#include <cmath>

namespace glat {

FrozenProjections make_frozen_projections(std::uint64_t seed, int d, int d_k, int d_v) {
    if (d < 1 || d_k < 1 || d_v < 1)
        throw DimensionError("make_frozen_projections: dimensions must be >= 1 (d=" + std::to_string(d) +
                             ", d_k=" + std::to_string(d_k) + ", d_v=" + std::to_string(d_v) + ")");
    FrozenProjections p;
    p.seed = seed;
    p.d_k = d_k;
    p.d_v = d_v;
    p.Wq.resize(d, d_k);
    p.Wk.resize(d, d_k);
    p.Wv.resize(d, d_v);
    SplitMix64 gen(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    fill_gaussian(p.Wq, gen, scale);
    fill_gaussian(p.Wk, gen, scale);
    fill_gaussian(p.Wv, gen, scale);
    return p;
}

ProviderKind provider_kind_from_string(const std::string& s) {
    if (s == "passthrough") return ProviderKind::Passthrough;
    if (s == "random-projection") return ProviderKind::RandomProjection;
    throw ConfigError("unknown provider kind '" + s + "' (expected passthrough|random-projection)");
}

std::string to_string(ProviderKind kind) {
    return kind == ProviderKind::Passthrough ? "passthrough" : "random-projection";
}

Matrix provider_projection(const FeatureProviderSpec& spec, int d) {
    if (spec.out_dim < 1)
        throw DimensionError("provider out_dim must be >= 1, got " + std::to_string(spec.out_dim));
    Matrix r(d, spec.out_dim);
    SplitMix64 gen(spec.seed);
    fill_gaussian(r, gen, 1.0 / std::sqrt(static_cast<double>(d)));
    return r;
}

EmbeddingTable local_extract(const FeatureProviderSpec& spec, const EmbeddingTable& table) {
    table.validate();
    if (spec.kind == ProviderKind::Passthrough) return table;

    const Matrix r = provider_projection(spec, table.d);
    EmbeddingTable out;
    out.d = spec.out_dim;
    out.patch_px = table.patch_px;
    out.slide_id = table.slide_id;
    out.records.reserve(table.records.size());
    for (const PatchRecord& rec : table.records) {
        PatchRecord projected{rec.id, rec.x, rec.y, r.transpose() * rec.embedding};
        out.records.push_back(std::move(projected));
    }
    return out;
}

}  // namespace glat
