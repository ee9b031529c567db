#pragma once

#include <functional>

#include "sail/nn.hpp"

namespace sail {

// Central-difference gradient of an arbitrary scalar function of the
// parameters. Deliberately independent of mlp_backward so it can serve as its
// oracle.
inline MlpGrads finite_diff_grad(const std::function<double(const MlpParams&)>& f, const MlpParams& params,
                                 double eps = 1e-5) {
    if (!(eps > 0.0)) throw ConfigError("finite_diff_grad: eps must be > 0");
    MlpGrads g = MlpGrads::zeros_like(params);
    MlpParams work = params;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& w = work.layers[l].w.data;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double saved = w[i];
            w[i] = saved + eps;
            const double hi = f(work);
            w[i] = saved - eps;
            const double lo = f(work);
            w[i] = saved;
            g.w[l].data[i] = (hi - lo) / (2.0 * eps);
        }
        auto& b = work.layers[l].b;
        for (std::size_t i = 0; i < b.size(); ++i) {
            const double saved = b[i];
            b[i] = saved + eps;
            const double hi = f(work);
            b[i] = saved - eps;
            const double lo = f(work);
            b[i] = saved;
            g.b[l][i] = (hi - lo) / (2.0 * eps);
        }
    }
    return g;
}

// Relative error with an absolute floor, the usual gradcheck metric.
inline double grad_rel_error(const MlpGrads& a, const MlpGrads& n) {
    double worst = 0.0;
    auto cmp = [&](double x, double y) {
        const double denom = std::max({1.0, std::fabs(x), std::fabs(y)});
        worst = std::max(worst, std::fabs(x - y) / denom);
    };
    for (std::size_t l = 0; l < a.w.size(); ++l) {
        for (std::size_t i = 0; i < a.w[l].data.size(); ++i) cmp(a.w[l].data[i], n.w[l].data[i]);
        for (std::size_t i = 0; i < a.b[l].size(); ++i) cmp(a.b[l][i], n.b[l][i]);
    }
    return worst;
}

}  // namespace sail
