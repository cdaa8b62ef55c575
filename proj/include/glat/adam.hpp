#pragma once

#include "glat/gradients.hpp"

namespace glat {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-5;
};

/// First/second moment per trainable tensor, in param_views order.
struct AdamState {
    long t = 0;
    std::vector<Vector> m;
    std::vector<Vector> v;
};

AdamState make_adam_state(const ModelParams& params);

/// One update with bias-corrected moments and decoupled weight decay:
/// p -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p).
void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state, const AdamConfig& cfg);

}  // namespace glat
