#include "glat/gradients.hpp"

#include "glat/error.hpp"
#include "glat/numeric.hpp"

#include <cmath>

namespace glat {

ParamGrads ParamGrads::zeros_like(const ModelParams& p) {
    ParamGrads g;
    g.Wq = Matrix::Zero(p.glat.Wq.rows(), p.glat.Wq.cols());
    g.Wk = Matrix::Zero(p.glat.Wk.rows(), p.glat.Wk.cols());
    g.Wv = Matrix::Zero(p.glat.Wv.rows(), p.glat.Wv.cols());
    g.filter_coeffs = Vector::Zero(p.glat.filter.coeffs.size());
    g.agg_logits = Vector::Zero(p.agg_logits.size());
    g.cls_W = Matrix::Zero(p.cls_W.rows(), p.cls_W.cols());
    g.cls_b = Vector::Zero(p.cls_b.size());
    return g;
}

namespace {

template <typename M>
ParamView view_of(const std::string& name, M& m) {
    return ParamView{name, m.data(), m.size()};
}

}  // namespace

std::vector<ParamView> param_views(ModelParams& p) {
    std::vector<ParamView> v;
    v.push_back(view_of("glat.Wq", p.glat.Wq));
    v.push_back(view_of("glat.Wk", p.glat.Wk));
    v.push_back(view_of("glat.Wv", p.glat.Wv));
    if (p.attention == AttentionKind::Gla) v.push_back(view_of("filter.coeffs", p.glat.filter.coeffs));
    if (p.aggregation == AggregationMode::Convex) v.push_back(view_of("agg.logits", p.agg_logits));
    v.push_back(view_of("cls.W", p.cls_W));
    v.push_back(view_of("cls.b", p.cls_b));
    return v;
}

std::vector<ParamView> grad_views(const ModelParams& p, ParamGrads& g) {
    std::vector<ParamView> v;
    v.push_back(view_of("glat.Wq", g.Wq));
    v.push_back(view_of("glat.Wk", g.Wk));
    v.push_back(view_of("glat.Wv", g.Wv));
    if (p.attention == AttentionKind::Gla) v.push_back(view_of("filter.coeffs", g.filter_coeffs));
    if (p.aggregation == AggregationMode::Convex) v.push_back(view_of("agg.logits", g.agg_logits));
    v.push_back(view_of("cls.W", g.cls_W));
    v.push_back(view_of("cls.b", g.cls_b));
    return v;
}

namespace {

/// Accumulates one sample's gradient of ce + alpha * smooth, scaled by
/// 1 / batch_size, into g.
void backward_sample(const WSIBag& bag, const LaplacianBundle& bundle, const ModelParams& params,
                     double alpha, double inv_batch, ParamGrads& g) {
    const SampleForward f = forward_sample(bag, bundle, params);
    const Matrix e = bag.patches.matrix();
    const Index m = e.rows();
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(params.glat.d_k()));

    // classifier head
    Vector du = f.probs;
    du[bag.label.class_index] -= 1.0;
    g.cls_b += inv_batch * du;
    g.cls_W += inv_batch * (du * f.h_wsi.transpose());
    const Vector dh = params.cls_W.transpose() * du;

    // aggregation
    const Vector dw = f.gla.refined * dh;
    Matrix dH = f.weights * dh.transpose();
    if (params.aggregation == AggregationMode::Convex) {
        Vector d_ranked = Vector::Zero(m);
        for (Index i = 0; i < m; ++i) d_ranked[f.ranks[static_cast<std::size_t>(i)]] = dw[i];
        const Vector d_theta = softmax_backward(f.ranked_weights, d_ranked);
        g.agg_logits.head(m) += inv_batch * d_theta;
    }

    // smoothness penalty: sum_ij W_ij |H_i - H_j|^2 = 2 tr(H^T L H), so the
    // gradient in H is 4 L H
    dH += (alpha * 4.0) * (bundle.L * f.gla.refined);

    // attention: H = A V', Z = (Q' K'^T + lambda B) / sqrt(d_k)
    const Matrix dVf = f.gla.attention.transpose() * dH;
    const Matrix dA = dH * f.gla.vf.transpose();
    Matrix dZ(m, m);
    for (Index i = 0; i < m; ++i) {
        const double dot = f.gla.attention.row(i).dot(dA.row(i));
        dZ.row(i) = f.gla.attention.row(i).cwiseProduct((dA.row(i).array() - dot).matrix());
    }
    const Matrix dQf = (dZ * f.gla.kf) * inv_sqrt_dk;
    const Matrix dKf = (dZ.transpose() * f.gla.qf) * inv_sqrt_dk;

    Matrix dq, dk, dv;
    if (params.attention == AttentionKind::Gla) {
        const Matrix dL = dQf * f.gla.q.transpose() + dKf * f.gla.k.transpose() + dVf * f.gla.v.transpose();
        Matrix power = Matrix::Identity(m, m);
        for (Index c = 0; c < g.filter_coeffs.size(); ++c) {
            if (c > 0) power = (power * bundle.L).eval();
            g.filter_coeffs[c] += inv_batch * dL.cwiseProduct(power).sum();
        }
        dq = f.gla.l_theta.transpose() * dQf;
        dk = f.gla.l_theta.transpose() * dKf;
        dv = f.gla.l_theta.transpose() * dVf;
    } else {
        dq = dQf;
        dk = dKf;
        dv = dVf;
    }

    g.Wq += inv_batch * (e.transpose() * dq);
    g.Wk += inv_batch * (e.transpose() * dk);
    g.Wv += inv_batch * (e.transpose() * dv);
}

}  // namespace

ParamGrads backward_gradients(std::span<const WSIBag> batch, const ModelParams& params, double alpha,
                              std::span<const LaplacianBundle> bundles) {
    if (batch.empty()) throw DimensionError("backward_gradients: empty batch");
    if (bundles.size() != batch.size()) throw DimensionError("backward_gradients: bundles misaligned with batch");
    ParamGrads g = ParamGrads::zeros_like(params);
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i)
        backward_sample(batch[i], bundles[i], params, alpha, inv_batch, g);
    return g;
}

FdReport finite_diff_check(std::span<const WSIBag> batch, const ModelParams& params, double alpha,
                           std::span<const LaplacianBundle> bundles, double step) {
    ModelParams work = params;
    ParamGrads analytic = backward_gradients(batch, work, alpha, bundles);
    std::vector<ParamView> pv = param_views(work);
    std::vector<ParamView> gv = grad_views(work, analytic);

    FdReport report;
    for (std::size_t t = 0; t < pv.size(); ++t) {
        FdEntry entry;
        entry.name = pv[t].name;
        for (Index i = 0; i < pv[t].size; ++i) {
            const double saved = pv[t].data[i];
            pv[t].data[i] = saved + step;
            const double up = total_loss(batch, work, alpha, bundles).total;
            pv[t].data[i] = saved - step;
            const double down = total_loss(batch, work, alpha, bundles).total;
            pv[t].data[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double a = gv[t].data[i];
            const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
            if (rel >= entry.max_rel_err) {
                entry.max_rel_err = rel;
                entry.worst_index = i;
                entry.analytic = a;
                entry.numeric = numeric;
            }
        }
        report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace glat
