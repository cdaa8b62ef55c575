#include "glat/train.hpp"

#include "glat/error.hpp"
#include "glat/seeds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace glat {

Matrix predict_probs(std::span<const WSIBag> bags, std::span<const LaplacianBundle> bundles,
                     const ModelParams& params) {
    if (bags.size() != bundles.size()) throw DimensionError("predict_probs: bundles misaligned with bags");
    Matrix probs(static_cast<Index>(bags.size()), kNumClasses);
    for (std::size_t i = 0; i < bags.size(); ++i)
        probs.row(static_cast<Index>(i)) = forward_sample(bags[i], bundles[i], params).probs.transpose();
    return probs;
}

namespace {

template <typename T>
std::vector<T> gather(std::span<const T> items, std::span<const std::size_t> idx, std::size_t begin,
                      std::size_t end) {
    std::vector<T> out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) out.push_back(items[idx[i]]);
    return out;
}

}  // namespace

TrainResult train_loop(std::span<const WSIBag> train, std::span<const LaplacianBundle> train_bundles,
                       std::span<const WSIBag> val, std::span<const LaplacianBundle> val_bundles,
                       ModelParams init, const TrainConfig& cfg) {
    if (train.empty() || val.empty()) throw ConfigError("train_loop: empty train or val split");
    if (train.size() != train_bundles.size() || val.size() != val_bundles.size())
        throw DimensionError("train_loop: bundles misaligned with bags");
    if (cfg.batch_size < 1) throw ConfigError("train_loop: batch_size must be >= 1");
    if (cfg.max_epochs < 1) throw ConfigError("train_loop: max_epochs must be >= 1");
    if (cfg.patience < 1) throw ConfigError("train_loop: patience must be >= 1");

    std::vector<int> val_labels(val.size());
    for (std::size_t i = 0; i < val.size(); ++i) val_labels[i] = val[i].label.class_index;

    TrainResult result;
    ModelParams params = std::move(init);

    if (cfg.fd_check) {
        const std::size_t probe = std::min(train.size(), static_cast<std::size_t>(cfg.batch_size));
        result.fd_report = finite_diff_check(train.subspan(0, probe), params, cfg.alpha,
                                             train_bundles.subspan(0, probe));
        if (result.fd_report.max_rel_err >= 1e-4)
            throw Error("train_loop: gradient check failed, max relative error " +
                        std::to_string(result.fd_report.max_rel_err));
    }

    AdamConfig adam_cfg;
    adam_cfg.lr = cfg.lr;
    adam_cfg.weight_decay = cfg.weight_decay;
    AdamState adam = make_adam_state(params);

    const std::uint64_t epoch_root = seeds::epoch_root(cfg.seed);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    result.best_val_loss = std::numeric_limits<double>::infinity();
    int epochs_since_improvement = 0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        SplitMix64 gen(derive_seed(epoch_root, static_cast<std::uint64_t>(epoch)));
        shuffle(order, gen);

        double loss_weighted = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const std::vector<WSIBag> batch = gather(train, order, start, stop);
            const std::vector<LaplacianBundle> batch_bundles = gather(train_bundles, order, start, stop);
            const LossBreakdown loss = total_loss(batch, params, cfg.alpha, batch_bundles);
            if (!std::isfinite(loss.total))
                throw Error("train_loop: diverged at epoch " + std::to_string(epoch) + ": non-finite loss");
            loss_weighted += loss.total * static_cast<double>(stop - start);
            const ParamGrads grads = backward_gradients(batch, params, cfg.alpha, batch_bundles);
            adam_step(params, grads, adam, adam_cfg);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_weighted / static_cast<double>(train.size());
        const LossBreakdown val_loss = total_loss(val, params, cfg.alpha, val_bundles);
        if (!std::isfinite(val_loss.total))
            throw Error("train_loop: diverged at epoch " + std::to_string(epoch) + ": non-finite val loss");
        stats.val_loss = val_loss.total;
        const Matrix probs = predict_probs(val, val_bundles, params);
        const MetricsReport metrics = compute_metrics(probs, val_labels, cfg.kappa_weighting);
        stats.val_auc = metrics.auc;
        stats.val_kappa = metrics.kappa;
        result.history.push_back(stats);

        if (stats.val_loss < result.best_val_loss) {
            result.best_val_loss = stats.val_loss;
            result.best_epoch = epoch;
            result.best_params = params;
            epochs_since_improvement = 0;
        } else {
            ++epochs_since_improvement;
            if (epochs_since_improvement >= cfg.patience) break;
        }
    }
    return result;
}

SplitIndices stratified_split(std::span<const int> labels, double val_fraction, std::uint64_t seed) {
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw ConfigError("stratified_split: val_fraction must be in (0, 1)");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    SplitIndices out;
    SplitMix64 gen(seeds::split_root(seed));
    for (auto& [cls, members] : by_class) {
        shuffle(members, gen);
        std::size_t n_val = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(members.size())));
        if (n_val == 0 && members.size() >= 2) n_val = 1;
        for (std::size_t i = 0; i < members.size(); ++i)
            (i < n_val ? out.val : out.train).push_back(members[i]);
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    if (out.train.empty() || out.val.empty())
        throw ConfigError("stratified_split: split left one side empty");
    return out;
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, int k,
                                                       std::uint64_t seed) {
    if (k < 2) throw ConfigError("stratified_folds: need k >= 2");
    if (labels.size() < static_cast<std::size_t>(k))
        throw ConfigError("stratified_folds: fewer samples than folds");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    SplitMix64 gen(seeds::split_root(seed));
    std::size_t cursor = 0;
    for (auto& [cls, members] : by_class) {
        shuffle(members, gen);
        for (std::size_t i = 0; i < members.size(); ++i) {
            folds[cursor % static_cast<std::size_t>(k)].push_back(members[i]);
            ++cursor;
        }
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

}  // namespace glat
