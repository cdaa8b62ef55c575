#pragma once

#include "glat/embedding.hpp"
#include "glat/provider.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace glat {

/// Row-stochastic attention over the current pool, rows/cols aligned with
/// pool_ids.
struct AttentionMap {
    Matrix A;
    std::vector<PatchId> pool_ids;

    void validate() const;  // rows sum to 1 within 1e-9, entries in [0,1]
};

enum class ScoreMode {
    Received,  // S_i = column mean: attention patch i receives (default)
    RowMean,   // S_i = row mean: identically 1/P for a row-stochastic map
};

ScoreMode score_mode_from_string(const std::string& s);
std::string to_string(ScoreMode mode);

/// Frozen-attention map of the pool: row_softmax(Q K^T / sqrt(d_k)) with
/// Q = E Wq, K = E Wk.
AttentionMap attention_matrix(const EmbeddingTable& pool, const FrozenProjections& proj);

/// Context-refined embeddings E' = A (E Wv), one row per pool patch.
Matrix refine_embeddings(const EmbeddingTable& pool, const AttentionMap& attention,
                         const FrozenProjections& proj);

/// Importance scores aligned with attention.pool_ids.
Vector importance_scores(const AttentionMap& attention, ScoreMode mode);

/// Ids of the min(M, P) highest-scoring patches; ties go to the smaller id;
/// result sorted ascending by id.
std::vector<PatchId> select_top_m(const Vector& scores, std::span<const PatchId> pool_ids, int m);

struct SelectionState {
    int t = 0;                          // iterations completed
    std::vector<PatchId> selected_ids;  // ascending
    Vector scores;                      // aligned with selected_ids
    int m = 0;
    int total_iterations = 0;
};

struct IrmIteration {
    int t = 0;
    std::vector<PatchId> pool_ids;
    Vector scores;   // aligned with pool_ids
    Matrix refined;  // E' over the pool, retained for inspection
    std::vector<PatchId> selected_ids;
};

struct IrmResult {
    SelectionState final_state;
    std::vector<IrmIteration> trace;
};

/// The progressive selection loop. Ids are shuffled by shuffle_seed
/// (Fisher-Yates over id-sorted order), split into T contiguous subsets
/// (first T-1 of size floor(N/T), last takes the remainder). Iteration 0
/// pools subset 0; iteration t pools the previous selection plus subset t.
/// Each pool is scored with the frozen attention and cut to the top M.
IrmResult irm_run(const EmbeddingTable& table, const FrozenProjections& proj, int m, int t_iters,
                  std::uint64_t shuffle_seed, ScoreMode mode);

}  // namespace glat
