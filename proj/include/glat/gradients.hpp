#pragma once

#include "glat/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace glat {

/// Gradient accumulator mirroring every trainable tensor of ModelParams.
struct ParamGrads {
    Matrix Wq, Wk, Wv;
    Vector filter_coeffs;
    Vector agg_logits;
    Matrix cls_W;
    Vector cls_b;

    static ParamGrads zeros_like(const ModelParams& p);
};

/// Flat view over one named tensor; params and grads share the layout so the
/// optimizer and the finite-difference checker can walk them in lockstep.
struct ParamView {
    std::string name;
    double* data = nullptr;
    Index size = 0;
};

/// Views over the tensors that actually train under the model's switches:
/// filter coefficients are held out under plain attention, aggregation
/// logits under mean pooling. Order is stable.
std::vector<ParamView> param_views(ModelParams& p);
std::vector<ParamView> grad_views(const ModelParams& p, ParamGrads& g);

/// Analytic gradient of total_loss (mean CE + alpha * mean smoothness) with
/// respect to every trainable tensor, averaged over the batch.
ParamGrads backward_gradients(std::span<const WSIBag> batch, const ModelParams& params, double alpha,
                              std::span<const LaplacianBundle> bundles);

struct FdEntry {
    std::string name;
    double max_rel_err = 0.0;
    Index worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

struct FdReport {
    std::vector<FdEntry> entries;
    double max_rel_err = 0.0;
};

/// Central differences against the analytic gradients; relative error uses
/// |a - n| / max(|a|, |n|, 1e-8).
FdReport finite_diff_check(std::span<const WSIBag> batch, const ModelParams& params, double alpha,
                           std::span<const LaplacianBundle> bundles, double step = 1e-5);

}  // namespace glat
