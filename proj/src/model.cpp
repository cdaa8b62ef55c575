#include "glat/model.hpp"

#include "glat/error.hpp"
#include "glat/numeric.hpp"
#include "glat/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace glat {

AttentionKind attention_kind_from_string(const std::string& s) {
    if (s == "gla") return AttentionKind::Gla;
    if (s == "msa") return AttentionKind::Msa;
    throw ConfigError("attention must be 'gla' or 'msa', got '" + s + "'");
}

AggregationMode aggregation_mode_from_string(const std::string& s) {
    if (s == "convex") return AggregationMode::Convex;
    if (s == "mean") return AggregationMode::Mean;
    throw ConfigError("aggregation must be 'convex' or 'mean', got '" + s + "'");
}

std::string to_string(AttentionKind k) {
    return k == AttentionKind::Gla ? "gla" : "msa";
}

std::string to_string(AggregationMode m) {
    return m == AggregationMode::Convex ? "convex" : "mean";
}

ModelParams init_model_params(int d, int d_k, int d_v, int m_max, int filter_order, double lambda,
                              GraphBiasMode bias, AttentionKind attention, AggregationMode aggregation,
                              std::uint64_t seed) {
    if (d <= 0 || d_k <= 0 || d_v <= 0) throw ConfigError("model dims must be positive");
    if (m_max <= 0) throw ConfigError("m_max must be positive");
    if (filter_order < 0 || filter_order > kMaxFilterOrder)
        throw ConfigError("filter order must be in [0, " + std::to_string(kMaxFilterOrder) + "]");

    ModelParams p;
    SplitMix64 gen(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    p.glat.Wq.resize(d, d_k);
    p.glat.Wk.resize(d, d_k);
    p.glat.Wv.resize(d, d_v);
    fill_gaussian(p.glat.Wq, gen, scale);
    fill_gaussian(p.glat.Wk, gen, scale);
    fill_gaussian(p.glat.Wv, gen, scale);
    p.glat.filter = FilterParams::identity(filter_order);
    p.glat.lambda = lambda;
    p.glat.graph_bias = bias;
    p.attention = attention;
    p.aggregation = aggregation;
    p.agg_logits = Vector::Zero(m_max);
    p.cls_W = Matrix::Zero(kNumClasses, d_v);
    p.cls_b = Vector::Zero(kNumClasses);
    return p;
}

Vector convex_weights(const Vector& theta_slice) {
    if (theta_slice.size() == 0) throw DimensionError("convex_weights: empty logit slice");
    return softmax(theta_slice);
}

Vector aggregate_wsi(const Matrix& h, const Vector& w) {
    if (h.rows() != w.size())
        throw DimensionError("aggregate_wsi: " + std::to_string(h.rows()) + " rows vs " +
                             std::to_string(w.size()) + " weights");
    return h.transpose() * w;
}

Vector classify(const Vector& h_wsi, const Matrix& cls_w, const Vector& cls_b) {
    if (cls_w.cols() != h_wsi.size() || cls_w.rows() != cls_b.size())
        throw DimensionError("classify: classifier shape mismatch");
    return softmax((cls_w * h_wsi + cls_b).eval());
}

double smoothness_penalty(const Matrix& h, const Matrix& w_adj) {
    if (w_adj.rows() != h.rows() || w_adj.cols() != h.rows())
        throw DimensionError("smoothness_penalty: adjacency does not match rows");
    double acc = 0.0;
    for (Index i = 0; i < h.rows(); ++i) {
        for (Index j = 0; j < h.rows(); ++j) {
            if (i == j) continue;
            acc += w_adj(i, j) * (h.row(i) - h.row(j)).squaredNorm();
        }
    }
    return acc;
}

std::vector<Index> selection_ranks(const Vector& selection_scores) {
    const Index n = selection_scores.size();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return selection_scores[a] > selection_scores[b];
    });
    std::vector<Index> rank(static_cast<std::size_t>(n));
    for (Index pos = 0; pos < n; ++pos) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = pos;
    return rank;
}

SampleForward forward_sample(const WSIBag& bag, const LaplacianBundle& bundle,
                             const ModelParams& params) {
    const Index m = bag.patches.size();
    if (m == 0) throw DimensionError("forward_sample: empty bag for slide '" + bag.slide_id + "'");
    if (m > params.m_max())
        throw DimensionError("forward_sample: bag of " + std::to_string(m) +
                             " patches exceeds aggregation capacity " + std::to_string(params.m_max()));
    if (bag.selection_scores.size() != m)
        throw DimensionError("forward_sample: selection scores misaligned for slide '" + bag.slide_id + "'");

    SampleForward f;
    const Matrix e = bag.patches.matrix();
    if (params.attention == AttentionKind::Gla) {
        f.gla = gla_forward(e, bundle, params.glat);
    } else {
        f.gla = msa_forward(e, params.glat);
    }

    f.ranks = selection_ranks(bag.selection_scores);
    if (params.aggregation == AggregationMode::Convex) {
        f.ranked_weights = convex_weights(params.agg_logits.head(m));
    } else {
        f.ranked_weights = Vector::Constant(m, 1.0 / static_cast<double>(m));
    }
    f.weights.resize(m);
    for (Index i = 0; i < m; ++i) f.weights[i] = f.ranked_weights[f.ranks[static_cast<std::size_t>(i)]];

    f.h_wsi = aggregate_wsi(f.gla.refined, f.weights);
    f.probs = classify(f.h_wsi, params.cls_W, params.cls_b);
    if (!label_valid(bag.label)) throw ConfigError("forward_sample: invalid label for slide '" + bag.slide_id + "'");
    f.ce = -std::log(std::max(f.probs[bag.label.class_index], 1e-300));
    f.smooth = smoothness_penalty(f.gla.refined, bundle.W);
    return f;
}

LossBreakdown total_loss(std::span<const WSIBag> batch, const ModelParams& params, double alpha,
                         std::span<const LaplacianBundle> bundles) {
    if (batch.empty()) throw DimensionError("total_loss: empty batch");
    if (bundles.size() != batch.size()) throw DimensionError("total_loss: bundles misaligned with batch");
    LossBreakdown out;
    out.ce.reserve(batch.size());
    out.smooth.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const SampleForward f = forward_sample(batch[i], bundles[i], params);
        out.ce.push_back(f.ce);
        out.smooth.push_back(f.smooth);
    }
    const double n = static_cast<double>(batch.size());
    out.ce_mean = std::accumulate(out.ce.begin(), out.ce.end(), 0.0) / n;
    out.smooth_mean = std::accumulate(out.smooth.begin(), out.smooth.end(), 0.0) / n;
    out.total = out.ce_mean + alpha * out.smooth_mean;
    return out;
}

}  // namespace glat
