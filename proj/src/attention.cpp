#include "glat/attention.hpp"

#include "glat/numeric.hpp"

#include <cmath>

namespace glat {

GraphBiasMode graph_bias_from_string(const std::string& s) {
    if (s == "laplacian") return GraphBiasMode::Laplacian;
    if (s == "negative-laplacian") return GraphBiasMode::NegativeLaplacian;
    if (s == "adjacency") return GraphBiasMode::Adjacency;
    throw ConfigError("unknown graph bias '" + s + "' (expected laplacian|negative-laplacian|adjacency)");
}

std::string to_string(GraphBiasMode mode) {
    switch (mode) {
        case GraphBiasMode::Laplacian: return "laplacian";
        case GraphBiasMode::NegativeLaplacian: return "negative-laplacian";
        case GraphBiasMode::Adjacency: return "adjacency";
    }
    return "laplacian";
}

Matrix graph_bias_matrix(const LaplacianBundle& bundle, GraphBiasMode mode) {
    switch (mode) {
        case GraphBiasMode::Laplacian: return bundle.L;
        case GraphBiasMode::NegativeLaplacian: return -bundle.L;
        case GraphBiasMode::Adjacency: return bundle.W;
    }
    return bundle.L;
}

namespace {

void check_projection_shapes(const Matrix& e_sel, const GlatLayerParams& params) {
    if (e_sel.cols() != params.Wq.rows() || e_sel.cols() != params.Wk.rows() ||
        e_sel.cols() != params.Wv.rows())
        throw DimensionError("attention: embedding dim " + std::to_string(e_sel.cols()) +
                             " does not match projection rows");
    if (params.Wq.cols() != params.Wk.cols())
        throw DimensionError("attention: Wq and Wk must share d_k");
    if (params.lambda < 0.0) throw Error("attention: lambda must be >= 0");
}

}  // namespace

GlaCache gla_forward(const Matrix& e_sel, const LaplacianBundle& bundle,
                     const GlatLayerParams& params) {
    check_projection_shapes(e_sel, params);
    if (bundle.size() != e_sel.rows())
        throw DimensionError("gla_forward: bundle has " + std::to_string(bundle.size()) +
                             " nodes, embeddings have " + std::to_string(e_sel.rows()) + " rows");
    GlaCache c;
    c.q = e_sel * params.Wq;
    c.k = e_sel * params.Wk;
    c.v = e_sel * params.Wv;
    c.l_theta = filter_matrix(params.filter, bundle.L);
    c.qf = c.l_theta * c.q;
    c.kf = c.l_theta * c.k;
    c.vf = c.l_theta * c.v;
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(params.d_k()));
    const Matrix bias = graph_bias_matrix(bundle, params.graph_bias);
    c.attention = row_softmax(((c.qf * c.kf.transpose() + params.lambda * bias) * inv_sqrt_dk).eval());
    c.refined = c.attention * c.vf;
    return c;
}

AttentionOutput gla_attention(const Matrix& e_sel, const LaplacianBundle& bundle,
                              const GlatLayerParams& params) {
    GlaCache c = gla_forward(e_sel, bundle, params);
    return {std::move(c.attention), std::move(c.refined)};
}

GlaCache msa_forward(const Matrix& e_sel, const GlatLayerParams& params) {
    check_projection_shapes(e_sel, params);
    GlaCache c;
    c.q = e_sel * params.Wq;
    c.k = e_sel * params.Wk;
    c.v = e_sel * params.Wv;
    c.l_theta = Matrix::Identity(e_sel.rows(), e_sel.rows());
    c.qf = c.q;
    c.kf = c.k;
    c.vf = c.v;
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(params.d_k()));
    c.attention = row_softmax((c.q * c.k.transpose() * inv_sqrt_dk).eval());
    c.refined = c.attention * c.v;
    return c;
}

AttentionOutput msa_baseline(const Matrix& e_sel, const GlatLayerParams& params) {
    GlaCache c = msa_forward(e_sel, params);
    return {std::move(c.attention), std::move(c.refined)};
}

}  // namespace glat
