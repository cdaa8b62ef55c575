#pragma once

#include "glat/graph.hpp"

#include <string>

namespace glat {

/// Which matrix biases the attention logits. `laplacian` adds lambda*L,
/// which suppresses attention between similar patches; `negative-laplacian`
/// and `adjacency` are the attraction variants.
enum class GraphBiasMode { Laplacian, NegativeLaplacian, Adjacency };

GraphBiasMode graph_bias_from_string(const std::string& s);
std::string to_string(GraphBiasMode mode);

/// Trainable layer parameters: Q/K/V projections (distinct from the frozen
/// scorer projections), the spectral filter, and the graph-bias settings.
/// lambda is a hyperparameter, not trained.
struct GlatLayerParams {
    Matrix Wq;  // d x d_k
    Matrix Wk;  // d x d_k
    Matrix Wv;  // d x d_v
    FilterParams filter;
    double lambda = 0.1;
    GraphBiasMode graph_bias = GraphBiasMode::Laplacian;

    int d() const { return static_cast<int>(Wq.rows()); }
    int d_k() const { return static_cast<int>(Wq.cols()); }
    int d_v() const { return static_cast<int>(Wv.cols()); }
};

/// Forward intermediates kept for the backward pass.
struct GlaCache {
    Matrix q, k, v;     // E Wq, E Wk, E Wv
    Matrix l_theta;     // filter matrix (identity for the MSA baseline)
    Matrix qf, kf, vf;  // filtered Q', K', V'
    Matrix attention;   // A', row-stochastic
    Matrix refined;     // H = A' V'
};

struct AttentionOutput {
    Matrix attention;  // M x M
    Matrix refined;    // M x d_v
};

/// Graph Laplacian attention:
///   A' = row_softmax((Q'K'^T + lambda*B) / sqrt(d_k)),  H = A'V'
/// with (Q',K',V') the filtered projections and B the graph bias.
GlaCache gla_forward(const Matrix& e_sel, const LaplacianBundle& bundle,
                     const GlatLayerParams& params);
AttentionOutput gla_attention(const Matrix& e_sel, const LaplacianBundle& bundle,
                              const GlatLayerParams& params);

/// Plain scaled dot-product attention with the same projections; no filter,
/// no graph bias. Equals gla_attention with lambda=0 and identity filter.
GlaCache msa_forward(const Matrix& e_sel, const GlatLayerParams& params);
AttentionOutput msa_baseline(const Matrix& e_sel, const GlatLayerParams& params);

/// The bias matrix B for a mode: L, -L, or W.
Matrix graph_bias_matrix(const LaplacianBundle& bundle, GraphBiasMode mode);

}  // namespace glat
