#include "glat/adam.hpp"

#include "glat/error.hpp"

#include <cmath>

namespace glat {

AdamState make_adam_state(const ModelParams& params) {
    ModelParams scratch = params;
    AdamState s;
    for (const ParamView& view : param_views(scratch)) {
        s.m.push_back(Vector::Zero(view.size));
        s.v.push_back(Vector::Zero(view.size));
    }
    return s;
}

void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state, const AdamConfig& cfg) {
    ParamGrads g = grads;
    std::vector<ParamView> pv = param_views(params);
    std::vector<ParamView> gv = grad_views(params, g);
    if (state.m.size() != pv.size()) throw DimensionError("adam_step: state does not match parameter set");

    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t k = 0; k < pv.size(); ++k) {
        if (state.m[k].size() != pv[k].size) throw DimensionError("adam_step: moment size mismatch for " + pv[k].name);
        for (Index i = 0; i < pv[k].size; ++i) {
            const double grad = gv[k].data[i];
            double& m = state.m[k][i];
            double& v = state.v[k][i];
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad;
            const double m_hat = m / bc1;
            const double v_hat = v / bc2;
            const double updated =
                pv[k].data[i] - cfg.lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) + cfg.weight_decay * pv[k].data[i]);
            if (!std::isfinite(updated))
                throw Error("adam_step: non-finite update in " + pv[k].name + " at index " + std::to_string(i));
            pv[k].data[i] = updated;
        }
    }
}

}  // namespace glat
