#include "glat/metrics.hpp"

#include "glat/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

namespace glat {

KappaWeighting kappa_weighting_from_string(const std::string& s) {
    if (s == "none") return KappaWeighting::None;
    if (s == "quadratic") return KappaWeighting::Quadratic;
    throw ConfigError("kappa weighting must be 'none' or 'quadratic', got '" + s + "'");
}

namespace {

/// Binary AUC via the Mann-Whitney statistic on average ranks.
double binary_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }

    double pos_rank_sum = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (positive[k]) {
            pos_rank_sum += rank[k];
            ++n_pos;
        }
    }
    const std::size_t n_neg = n - n_pos;
    const double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace

double auc_metric(const Matrix& probs, std::span<const int> labels) {
    if (static_cast<std::size_t>(probs.rows()) != labels.size())
        throw DimensionError("auc_metric: probability rows do not match labels");
    std::set<int> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2) throw Error("auc_metric: need at least two distinct labels");

    double acc = 0.0;
    int classes = 0;
    for (int c = 0; c < static_cast<int>(probs.cols()); ++c) {
        if (!distinct.contains(c)) continue;
        std::vector<double> scores(labels.size());
        std::vector<bool> positive(labels.size());
        for (std::size_t r = 0; r < labels.size(); ++r) {
            scores[r] = probs(static_cast<Index>(r), c);
            positive[r] = labels[r] == c;
        }
        acc += binary_auc(scores, positive);
        ++classes;
    }
    return acc / static_cast<double>(classes);
}

KappaResult kappa_metric(std::span<const int> predicted, std::span<const int> truth, KappaWeighting w) {
    if (predicted.size() != truth.size()) throw DimensionError("kappa_metric: length mismatch");
    if (predicted.empty()) throw Error("kappa_metric: empty input");
    const int c = kNumClasses;
    Matrix confusion = Matrix::Zero(c, c);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= c || predicted[i] < 0 || predicted[i] >= c)
            throw Error("kappa_metric: label out of range at index " + std::to_string(i));
        confusion(truth[i], predicted[i]) += 1.0;
    }
    const double n = static_cast<double>(truth.size());
    const Vector row_marg = confusion.rowwise().sum() / n;
    const Vector col_marg = confusion.colwise().sum().transpose() / n;

    auto weight = [&](int a, int b) {
        if (w == KappaWeighting::None) return a == b ? 0.0 : 1.0;
        const double diff = static_cast<double>(a - b);
        return diff * diff;
    };
    double disagree_obs = 0.0;
    double disagree_exp = 0.0;
    for (int a = 0; a < c; ++a) {
        for (int b = 0; b < c; ++b) {
            disagree_obs += weight(a, b) * confusion(a, b) / n;
            disagree_exp += weight(a, b) * row_marg[a] * col_marg[b];
        }
    }
    KappaResult out;
    if (disagree_exp <= 1e-15) {
        out.degenerate = true;
        out.kappa = 0.0;
        return out;
    }
    out.kappa = 1.0 - disagree_obs / disagree_exp;
    return out;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) throw DimensionError("accuracy: length mismatch");
    if (predicted.empty()) throw Error("accuracy: empty input");
    std::size_t hit = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (predicted[i] == truth[i]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

int argmax_class(const Vector& probs) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(probs.size()); ++c)
        if (probs[c] > probs[best]) best = c;
    return best;
}

MetricsReport compute_metrics(const Matrix& probs, std::span<const int> labels, KappaWeighting w) {
    MetricsReport r;
    std::vector<int> predicted(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        predicted[i] = argmax_class(probs.row(static_cast<Index>(i)).transpose());
    r.auc = auc_metric(probs, labels);
    const KappaResult kr = kappa_metric(predicted, labels, w);
    r.kappa = kr.kappa;
    r.kappa_degenerate = kr.degenerate;
    r.acc = accuracy(predicted, labels);
    for (int lbl : labels) r.truth_counts[static_cast<std::size_t>(lbl)] += 1;
    return r;
}

}  // namespace glat
