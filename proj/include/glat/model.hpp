#pragma once

#include "glat/attention.hpp"
#include "glat/embedding.hpp"

#include <span>
#include <string>
#include <vector>

namespace glat {

enum class AttentionKind { Gla, Msa };
enum class AggregationMode { Convex, Mean };

AttentionKind attention_kind_from_string(const std::string& s);
AggregationMode aggregation_mode_from_string(const std::string& s);
std::string to_string(AttentionKind k);
std::string to_string(AggregationMode m);

/// Every trainable parameter of the model plus the structural switches.
/// agg_logits is sized for the configured M; a slide with fewer selected
/// patches uses a prefix slice, indexed by selection-score rank.
struct ModelParams {
    GlatLayerParams glat;
    AttentionKind attention = AttentionKind::Gla;
    AggregationMode aggregation = AggregationMode::Convex;
    Vector agg_logits;  // length M_max
    Matrix cls_W;       // C x d_v
    Vector cls_b;       // C

    int d_v() const { return static_cast<int>(cls_W.cols()); }
    int m_max() const { return static_cast<int>(agg_logits.size()); }
};

/// Projections normal with sd 1/sqrt(d) (one stream: Wq, Wk, Wv row-major),
/// classifier and aggregation logits zero, filter at identity. The initial
/// model is plain scaled dot-product attention with uniform aggregation.
ModelParams init_model_params(int d, int d_k, int d_v, int m_max, int filter_order, double lambda,
                              GraphBiasMode bias, AttentionKind attention, AggregationMode aggregation,
                              std::uint64_t seed);

/// Softmax of an aggregation-logit slice: nonnegative, sums to 1.
Vector convex_weights(const Vector& theta_slice);

/// H_WSI = sum_i w_i H_i; stays inside the convex hull of the rows of H.
Vector aggregate_wsi(const Matrix& h, const Vector& w);

/// Class probabilities softmax(cls_W h + cls_b).
Vector classify(const Vector& h_wsi, const Matrix& cls_w, const Vector& cls_b);

/// sum_{i,j} W_ij |H_i - H_j|^2 over ordered pairs; equals 2 tr(H^T L H).
double smoothness_penalty(const Matrix& h, const Matrix& w_adj);

/// rank[i] = position of row i when rows are ordered by descending
/// selection score, ties to the lower row index. Row i uses aggregation
/// logit theta[rank[i]].
std::vector<Index> selection_ranks(const Vector& selection_scores);

/// Full per-sample forward state kept for the backward pass.
struct SampleForward {
    GlaCache gla;
    std::vector<Index> ranks;
    Vector ranked_weights;  // softmax of the theta prefix (by rank)
    Vector weights;         // per-row, weights[i] = ranked_weights[ranks[i]]
    Vector h_wsi;
    Vector probs;
    double ce = 0.0;
    double smooth = 0.0;
};

SampleForward forward_sample(const WSIBag& bag, const LaplacianBundle& bundle,
                             const ModelParams& params);

struct LossBreakdown {
    double total = 0.0;
    double ce_mean = 0.0;
    double smooth_mean = 0.0;
    std::vector<double> ce;      // per sample
    std::vector<double> smooth;  // per sample
};

/// Mean cross-entropy over the batch plus alpha times the mean smoothness
/// penalty. One bundle per bag, aligned.
LossBreakdown total_loss(std::span<const WSIBag> batch, const ModelParams& params, double alpha,
                         std::span<const LaplacianBundle> bundles);

}  // namespace glat
