#pragma once

#include "sail/nn.hpp"

namespace sail {

// Per-parameter Adam moments mirroring an MlpParams.
struct OptState {
    std::vector<Matrix> m_w, v_w;
    std::vector<Vec> m_b, v_b;
    long step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static OptState for_params(const MlpParams& p, double lr) {
        OptState s;
        s.lr = lr;
        for (const auto& l : p.layers) {
            s.m_w.emplace_back(l.w.rows, l.w.cols, 0.0);
            s.v_w.emplace_back(l.w.rows, l.w.cols, 0.0);
            s.m_b.emplace_back(l.b.size(), 0.0);
            s.v_b.emplace_back(l.b.size(), 0.0);
        }
        return s;
    }
};

namespace detail {

inline void adam_update_span(double* p, double* m, double* v, const double* g, std::size_t n, const OptState& s,
                             double bc1, double bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
    }
}

}  // namespace detail

// One bias-corrected Adam step. Gradients must be finite.
inline void adam_step(OptState& state, MlpParams& params, const MlpGrads& grads) {
    if (state.m_w.size() != params.layers.size() || grads.w.size() != params.layers.size())
        throw InternalError("adam_step: shape mismatch between state, params, grads");
    for (const auto& g : grads.w) require_finite(g.data, "adam_step gradients");
    for (const auto& g : grads.b) require_finite(g, "adam_step gradients");

    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& layer = params.layers[l];
        detail::adam_update_span(layer.w.data.data(), state.m_w[l].data.data(), state.v_w[l].data.data(),
                                 grads.w[l].data.data(), layer.w.data.size(), state, bc1, bc2);
        detail::adam_update_span(layer.b.data(), state.m_b[l].data(), state.v_b[l].data(), grads.b[l].data(),
                                 layer.b.size(), state, bc1, bc2);
    }
}

// Soft (polyak) tracking of online params by a target copy.
inline void polyak_update(MlpParams& target, const MlpParams& online, double tau) {
    for (std::size_t l = 0; l < target.layers.size(); ++l) {
        auto& tw = target.layers[l].w.data;
        const auto& ow = online.layers[l].w.data;
        for (std::size_t i = 0; i < tw.size(); ++i) tw[i] += tau * (ow[i] - tw[i]);
        auto& tb = target.layers[l].b;
        const auto& ob = online.layers[l].b;
        for (std::size_t i = 0; i < tb.size(); ++i) tb[i] += tau * (ob[i] - tb[i]);
    }
}

}  // namespace sail
