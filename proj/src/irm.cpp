#include "glat/irm.hpp"

#include "glat/numeric.hpp"
#include "glat/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace glat {

void AttentionMap::validate() const {
    if (A.rows() != A.cols() || A.rows() != static_cast<Index>(pool_ids.size()))
        throw DimensionError("attention map: shape " + std::to_string(A.rows()) + "x" +
                             std::to_string(A.cols()) + " does not match " +
                             std::to_string(pool_ids.size()) + " pool ids");
    if (!A.allFinite()) throw Error("attention map: non-finite entry");
    for (Index i = 0; i < A.rows(); ++i) {
        if (std::abs(A.row(i).sum() - 1.0) > 1e-9)
            throw Error("attention map: row " + std::to_string(i) + " sums to " +
                        std::to_string(A.row(i).sum()));
        if (A.row(i).minCoeff() < 0.0 || A.row(i).maxCoeff() > 1.0)
            throw Error("attention map: row " + std::to_string(i) + " outside [0,1]");
    }
}

ScoreMode score_mode_from_string(const std::string& s) {
    if (s == "received") return ScoreMode::Received;
    if (s == "row-mean") return ScoreMode::RowMean;
    throw ConfigError("unknown score mode '" + s + "' (expected received|row-mean)");
}

std::string to_string(ScoreMode mode) {
    return mode == ScoreMode::Received ? "received" : "row-mean";
}

AttentionMap attention_matrix(const EmbeddingTable& pool, const FrozenProjections& proj) {
    if (pool.records.empty()) throw Error("attention_matrix: empty pool");
    if (pool.d != proj.d())
        throw DimensionError("attention_matrix: pool d=" + std::to_string(pool.d) +
                             " vs projections d=" + std::to_string(proj.d()));
    const Matrix e = pool.matrix();
    const Matrix q = e * proj.Wq;
    const Matrix k = e * proj.Wk;
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(proj.d_k));

    AttentionMap map;
    map.A = row_softmax((q * k.transpose() * inv_sqrt_dk).eval());
    map.pool_ids.reserve(pool.records.size());
    for (const PatchRecord& r : pool.records) map.pool_ids.push_back(r.id);
    return map;
}

Matrix refine_embeddings(const EmbeddingTable& pool, const AttentionMap& attention,
                         const FrozenProjections& proj) {
    if (static_cast<Index>(attention.pool_ids.size()) != pool.size())
        throw DimensionError("refine_embeddings: attention built over a different pool");
    if (pool.d != proj.d())
        throw DimensionError("refine_embeddings: pool d=" + std::to_string(pool.d) +
                             " vs projections d=" + std::to_string(proj.d()));
    return attention.A * (pool.matrix() * proj.Wv);
}

Vector importance_scores(const AttentionMap& attention, ScoreMode mode) {
    const Index p = attention.A.rows();
    Vector s(p);
    if (mode == ScoreMode::Received)
        s = attention.A.colwise().sum().transpose() / static_cast<double>(p);
    else
        s = attention.A.rowwise().sum() / static_cast<double>(p);
    return s;
}

std::vector<PatchId> select_top_m(const Vector& scores, std::span<const PatchId> pool_ids, int m) {
    if (m < 1) throw Error("select_top_m: M must be >= 1");
    if (scores.size() != static_cast<Index>(pool_ids.size()))
        throw DimensionError("select_top_m: " + std::to_string(scores.size()) + " scores vs " +
                             std::to_string(pool_ids.size()) + " ids");
    std::vector<std::size_t> order(pool_ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores(static_cast<Index>(a)) != scores(static_cast<Index>(b)))
            return scores(static_cast<Index>(a)) > scores(static_cast<Index>(b));
        return pool_ids[a] < pool_ids[b];
    });
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(m), order.size());
    std::vector<PatchId> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) out.push_back(pool_ids[order[i]]);
    std::sort(out.begin(), out.end());
    return out;
}

IrmResult irm_run(const EmbeddingTable& table, const FrozenProjections& proj, int m, int t_iters,
                  std::uint64_t shuffle_seed, ScoreMode mode) {
    table.validate();
    const Index n = table.size();
    if (n < 1) throw Error("irm_run: empty table");
    if (m < 1) throw Error("irm_run: M must be >= 1");
    if (t_iters < 1) throw Error("irm_run: T must be >= 1");
    if (t_iters > n)
        throw Error("irm_run: T=" + std::to_string(t_iters) + " exceeds N=" + std::to_string(n) +
                    " (subsets would be empty)");

    std::vector<PatchId> ids;
    ids.reserve(static_cast<std::size_t>(n));
    for (const PatchRecord& r : table.records) ids.push_back(r.id);
    SplitMix64 gen(shuffle_seed);
    shuffle(ids, gen);

    // First T-1 subsets take floor(N/T) ids, the last takes the remainder.
    const std::size_t base = static_cast<std::size_t>(n) / static_cast<std::size_t>(t_iters);
    std::vector<std::vector<PatchId>> subsets(static_cast<std::size_t>(t_iters));
    std::size_t cursor = 0;
    for (int t = 0; t < t_iters; ++t) {
        const std::size_t take = (t == t_iters - 1) ? ids.size() - cursor : base;
        subsets[static_cast<std::size_t>(t)].assign(ids.begin() + static_cast<std::ptrdiff_t>(cursor),
                                                    ids.begin() + static_cast<std::ptrdiff_t>(cursor + take));
        cursor += take;
    }

    IrmResult result;
    std::vector<PatchId> selected;
    for (int t = 0; t < t_iters; ++t) {
        std::vector<PatchId> pool_ids = selected;
        pool_ids.insert(pool_ids.end(), subsets[static_cast<std::size_t>(t)].begin(),
                        subsets[static_cast<std::size_t>(t)].end());
        const EmbeddingTable pool = table.subset(pool_ids);  // id-sorted

        const AttentionMap att = attention_matrix(pool, proj);
        const Vector scores = importance_scores(att, mode);
        selected = select_top_m(scores, att.pool_ids, m);

        IrmIteration it;
        it.t = t;
        it.pool_ids = att.pool_ids;
        it.scores = scores;
        it.refined = refine_embeddings(pool, att, proj);
        it.selected_ids = selected;
        result.trace.push_back(std::move(it));
    }

    const IrmIteration& last = result.trace.back();
    SelectionState state;
    state.t = t_iters;
    state.m = m;
    state.total_iterations = t_iters;
    state.selected_ids = selected;
    state.scores.resize(static_cast<Index>(selected.size()));
    for (std::size_t i = 0; i < selected.size(); ++i) {
        const auto pos = std::find(last.pool_ids.begin(), last.pool_ids.end(), selected[i]);
        state.scores(static_cast<Index>(i)) =
            last.scores(static_cast<Index>(pos - last.pool_ids.begin()));
    }
    result.final_state = std::move(state);
    return result;
}

}  // namespace glat
