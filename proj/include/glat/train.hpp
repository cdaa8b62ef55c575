#pragma once

#include "glat/adam.hpp"
#include "glat/metrics.hpp"

namespace glat {

struct TrainConfig {
    double lr = 1e-4;
    double weight_decay = 1e-5;
    int batch_size = 16;
    int max_epochs = 100;
    int patience = 10;
    double alpha = 0.01;
    std::uint64_t seed = 42;
    bool fd_check = false;
    KappaWeighting kappa_weighting = KappaWeighting::None;
};

struct EpochStats {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_auc = 0.0;
    double val_kappa = 0.0;
};

struct TrainResult {
    ModelParams best_params;
    std::vector<EpochStats> history;
    int best_epoch = 0;
    double best_val_loss = 0.0;
    FdReport fd_report;  // populated when fd_check was requested
};

/// Minibatch Adam with seeded epoch shuffles; stops once val loss has not
/// improved for `patience` consecutive epochs and returns the parameters of
/// the best val-loss epoch. Throws on divergence, naming the epoch. With
/// fd_check set, verifies analytic gradients on the first batch before any
/// update and aborts if the worst relative error reaches 1e-4.
TrainResult train_loop(std::span<const WSIBag> train, std::span<const LaplacianBundle> train_bundles,
                       std::span<const WSIBag> val, std::span<const LaplacianBundle> val_bundles,
                       ModelParams init, const TrainConfig& cfg);

/// Per-sample class probabilities, one row per bag.
Matrix predict_probs(std::span<const WSIBag> bags, std::span<const LaplacianBundle> bundles,
                     const ModelParams& params);

/// Seeded stratified holdout: per class, floor(count * val_fraction) samples
/// go to validation (at least one when the class has two or more samples).
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
};
SplitIndices stratified_split(std::span<const int> labels, double val_fraction, std::uint64_t seed);

/// Seeded stratified K folds: within each class, shuffled samples are dealt
/// round-robin to folds. Every sample lands in exactly one fold.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, int k,
                                                       std::uint64_t seed);

}  // namespace glat
