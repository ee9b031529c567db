#pragma once

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "sail/matrix.hpp"

namespace sail {

struct InternalError : std::logic_error {
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

enum class Act { relu, tanh, sigmoid, identity };

inline const char* act_name(Act a) {
    switch (a) {
        case Act::relu: return "relu";
        case Act::tanh: return "tanh";
        case Act::sigmoid: return "sigmoid";
        case Act::identity: return "identity";
    }
    return "?";
}

inline Act act_from_name(const std::string& s) {
    if (s == "relu") return Act::relu;
    if (s == "tanh") return Act::tanh;
    if (s == "sigmoid") return Act::sigmoid;
    if (s == "identity") return Act::identity;
    throw ConfigError("unknown activation: " + s);
}

inline double act_apply(Act a, double u) {
    switch (a) {
        case Act::relu: return u > 0.0 ? u : 0.0;
        case Act::tanh: return std::tanh(u);
        case Act::sigmoid: return sigmoid(u);
        case Act::identity: return u;
    }
    return u;
}

// First derivative, from preactivation u and postactivation z.
inline double act_deriv(Act a, double u, double z) {
    switch (a) {
        case Act::relu: return u > 0.0 ? 1.0 : 0.0;
        case Act::tanh: return 1.0 - z * z;
        case Act::sigmoid: return z * (1.0 - z);
        case Act::identity: return 1.0;
    }
    return 1.0;
}

// Second derivative, needed by the gradient-penalty backward pass.
inline double act_deriv2(Act a, double u, double z) {
    switch (a) {
        case Act::relu: return 0.0;
        case Act::tanh: return -2.0 * z * (1.0 - z * z);
        case Act::sigmoid: return z * (1.0 - z) * (1.0 - 2.0 * z);
        case Act::identity: return 0.0;
    }
    return 0.0;
}

// Weights W [out x in], bias b [out], activation tag per layer.
struct MlpLayer {
    Matrix w;
    Vec b;
    Act act = Act::identity;
};

struct MlpParams {
    std::vector<MlpLayer> layers;

    int in_dim() const { return layers.empty() ? 0 : layers.front().w.cols; }
    int out_dim() const { return layers.empty() ? 0 : layers.back().w.rows; }
};

// Gradient container mirroring MlpParams shapes.
struct MlpGrads {
    std::vector<Matrix> w;
    std::vector<Vec> b;

    static MlpGrads zeros_like(const MlpParams& p) {
        MlpGrads g;
        g.w.reserve(p.layers.size());
        g.b.reserve(p.layers.size());
        for (const auto& l : p.layers) {
            g.w.emplace_back(l.w.rows, l.w.cols, 0.0);
            g.b.emplace_back(l.b.size(), 0.0);
        }
        return g;
    }

    void scale(double s) {
        for (auto& m : w)
            for (double& x : m.data) x *= s;
        for (auto& v : b)
            for (double& x : v) x *= s;
    }
};

// Fan-in uniform init; `last_layer_scale` shrinks the output layer so fresh
// actors start near zero actions.
inline MlpParams make_mlp(int in_dim, const std::vector<int>& hidden, int out_dim, Act hidden_act, Act out_act,
                          Rng& rng, double last_layer_scale = 1.0) {
    std::vector<int> dims;
    dims.push_back(in_dim);
    for (int h : hidden) dims.push_back(h);
    dims.push_back(out_dim);

    MlpParams p;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        MlpLayer layer;
        layer.w = Matrix(dims[l + 1], dims[l]);
        layer.b.assign(dims[l + 1], 0.0);
        layer.act = (l + 2 == dims.size()) ? out_act : hidden_act;
        const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
        const double s = (l + 2 == dims.size()) ? last_layer_scale : 1.0;
        for (double& x : layer.w.data) x = s * uniform(rng, -bound, bound);
        for (double& x : layer.b) x = s * uniform(rng, -bound, bound);
        p.layers.push_back(std::move(layer));
    }
    return p;
}

// z[0] is the input batch; u[l] / z[l+1] are layer l's pre/post activations.
struct ForwardCache {
    std::vector<Matrix> z;
    std::vector<Matrix> u;
};

inline Matrix mlp_forward_batch(const MlpParams& p, const Matrix& x, ForwardCache* cache = nullptr) {
    if (p.layers.empty()) throw ConfigError("mlp_forward: empty network");
    if (x.cols != p.in_dim())
        throw ConfigError("mlp_forward: input dim " + std::to_string(x.cols) + " != " +
                          std::to_string(p.in_dim()));
    require_finite(x.data, "mlp_forward input");

    if (cache) {
        cache->z.clear();
        cache->u.clear();
        cache->z.push_back(x);
    }
    Matrix cur = x;
    Matrix pre;
    for (const auto& layer : p.layers) {
        linear_forward(cur, layer.w, layer.b, pre);
        Matrix post = pre;
        for (double& v : post.data) v = act_apply(layer.act, v);
        if (cache) {
            cache->u.push_back(pre);
            cache->z.push_back(post);
        }
        cur = std::move(post);
    }
    return cur;
}

inline Vec mlp_forward(const MlpParams& p, const Vec& input, ForwardCache* cache = nullptr) {
    Matrix y = mlp_forward_batch(p, Matrix::from_row(input), cache);
    return y.row_vec(0);
}

// Final-layer preactivation (the logit for sigmoid-headed nets).
inline Vec mlp_forward_logit(const MlpParams& p, const Vec& input, ForwardCache* cache = nullptr) {
    ForwardCache local;
    ForwardCache* c = cache ? cache : &local;
    mlp_forward_batch(p, Matrix::from_row(input), c);
    return c->u.back().row_vec(0);
}

inline void check_cache(const MlpParams& p, const ForwardCache& cache) {
    if (cache.z.size() != p.layers.size() + 1 || cache.u.size() != p.layers.size())
        throw InternalError("mlp_backward: cache does not match network depth");
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        if (cache.u[l].cols != p.layers[l].w.rows || cache.z[l].cols != p.layers[l].w.cols)
            throw InternalError("mlp_backward: cache layer shape mismatch");
    }
}

namespace detail {

// Shared backward walk. `start_at_preact` means dy is already the gradient at
// the final preactivation (used to fuse sigmoid + BCE stably).
inline Matrix backward_impl(const MlpParams& p, const ForwardCache& cache, const Matrix& dy, MlpGrads& grads,
                            bool start_at_preact) {
    check_cache(p, cache);
    if (dy.rows != cache.z[0].rows || dy.cols != p.out_dim())
        throw InternalError("mlp_backward: upstream gradient shape mismatch");

    const int depth = static_cast<int>(p.layers.size());
    Matrix dz = dy;  // gradient at current layer's postactivation
    for (int l = depth - 1; l >= 0; --l) {
        const auto& layer = p.layers[static_cast<std::size_t>(l)];
        const Matrix& u = cache.u[static_cast<std::size_t>(l)];
        const Matrix& z = cache.z[static_cast<std::size_t>(l) + 1];

        Matrix du = std::move(dz);
        if (!(l == depth - 1 && start_at_preact)) {
            for (std::size_t i = 0; i < du.data.size(); ++i)
                du.data[i] *= act_deriv(layer.act, u.data[i], z.data[i]);
        }

        linear_backward_params(du, cache.z[static_cast<std::size_t>(l)], grads.w[static_cast<std::size_t>(l)],
                               grads.b[static_cast<std::size_t>(l)]);
        Matrix dx;
        linear_backward_input(du, layer.w, dx);
        if (l == 0) return dx;
        dz = std::move(dx);
    }
    return Matrix();
}

}  // namespace detail

// Exact gradients of sum_n dy_n . y_n with respect to parameters (summed over
// the batch) and the input.
inline Matrix mlp_backward_batch(const MlpParams& p, const ForwardCache& cache, const Matrix& dy, MlpGrads& grads) {
    return detail::backward_impl(p, cache, dy, grads, false);
}

inline Matrix mlp_backward_preact_batch(const MlpParams& p, const ForwardCache& cache, const Matrix& du,
                                        MlpGrads& grads) {
    return detail::backward_impl(p, cache, du, grads, true);
}

inline std::pair<MlpGrads, Vec> mlp_backward(const MlpParams& p, const ForwardCache& cache, const Vec& upstream) {
    MlpGrads grads = MlpGrads::zeros_like(p);
    Matrix dx = mlp_backward_batch(p, cache, Matrix::from_row(upstream), grads);
    return {std::move(grads), dx.row_vec(0)};
}

// Gradient of the scalar output with respect to the input (single sample).
inline Vec mlp_input_grad(const MlpParams& p, const ForwardCache& cache) {
    if (p.out_dim() != 1) throw InternalError("mlp_input_grad: scalar-output nets only");
    MlpGrads scratch = MlpGrads::zeros_like(p);
    Matrix dx = mlp_backward_batch(p, cache, Matrix::from_row({1.0}), scratch);
    return dx.row_vec(0);
}

// Gradient of the final-layer preactivation with respect to the input.
inline Vec mlp_input_grad_preact(const MlpParams& p, const ForwardCache& cache) {
    if (p.out_dim() != 1) throw InternalError("mlp_input_grad_preact: scalar-output nets only");
    MlpGrads scratch = MlpGrads::zeros_like(p);
    Matrix dx = mlp_backward_preact_batch(p, cache, Matrix::from_row({1.0}), scratch);
    return dx.row_vec(0);
}

// Accumulates  scale * d/dtheta (||grad_x f|| - 1)^2  for a scalar-output net
// at input x, returning the unscaled penalty value. f is the net output, or
// the final preactivation when `at_preact` is set (the unbounded critic view
// of a sigmoid-headed classifier). Uses a forward tangent pass along
// v = grad_x f followed by an adjoint sweep, so the result is the exact
// parameter gradient of the penalty.
inline double accumulate_gradient_penalty(const MlpParams& p, const Vec& x, double scale, MlpGrads& grads,
                                          bool at_preact = false) {
    ForwardCache cache;
    mlp_forward(p, x, &cache);
    Vec g = at_preact ? mlp_input_grad_preact(p, cache) : mlp_input_grad(p, cache);
    const double gnorm = norm2(g);
    const double penalty = (gnorm - 1.0) * (gnorm - 1.0);
    const double c = scale * 2.0 * (gnorm - 1.0) / std::max(gnorm, 1e-12);

    const int depth = static_cast<int>(p.layers.size());
    // Tangent pass along v = g: s[l] = W_l t_{l-1}, t[l] = act'(u_l) . s[l].
    std::vector<Matrix> s_list(static_cast<std::size_t>(depth));
    std::vector<Matrix> t_list(static_cast<std::size_t>(depth));
    Matrix t = Matrix::from_row(g);
    for (int l = 0; l < depth; ++l) {
        const auto& layer = p.layers[static_cast<std::size_t>(l)];
        Matrix s;
        Vec zero_bias(layer.b.size(), 0.0);
        linear_forward(t, layer.w, zero_bias, s);
        Matrix tl = s;
        const Matrix& u = cache.u[static_cast<std::size_t>(l)];
        const Matrix& z = cache.z[static_cast<std::size_t>(l) + 1];
        for (std::size_t i = 0; i < tl.data.size(); ++i)
            tl.data[i] *= act_deriv(layer.act, u.data[i], z.data[i]);
        s_list[static_cast<std::size_t>(l)] = std::move(s);
        t_list[static_cast<std::size_t>(l)] = tl;
        t = std::move(tl);
    }

    // Adjoint sweep for phi = t_L (scalar).
    const auto dact = [&](int l, int i) {
        const Matrix& u = cache.u[static_cast<std::size_t>(l)];
        const Matrix& z = cache.z[static_cast<std::size_t>(l) + 1];
        return act_deriv(p.layers[static_cast<std::size_t>(l)].act, u.data[static_cast<std::size_t>(i)],
                         z.data[static_cast<std::size_t>(i)]);
    };
    const auto d2act = [&](int l, int i) {
        const Matrix& u = cache.u[static_cast<std::size_t>(l)];
        const Matrix& z = cache.z[static_cast<std::size_t>(l) + 1];
        return act_deriv2(p.layers[static_cast<std::size_t>(l)].act, u.data[static_cast<std::size_t>(i)],
                          z.data[static_cast<std::size_t>(i)]);
    };

    const int last = depth - 1;
    Matrix au(1, p.layers[static_cast<std::size_t>(last)].w.rows, 0.0);
    Matrix as(1, p.layers[static_cast<std::size_t>(last)].w.rows, 0.0);
    for (int i = 0; i < au.cols; ++i) {
        au.data[static_cast<std::size_t>(i)] =
            at_preact ? 0.0
                      : d2act(last, i) * s_list[static_cast<std::size_t>(last)].data[static_cast<std::size_t>(i)];
        as.data[static_cast<std::size_t>(i)] = at_preact ? 1.0 : dact(last, i);
    }

    const Matrix g_row = Matrix::from_row(g);
    for (int l = last; l >= 0; --l) {
        const auto& layer = p.layers[static_cast<std::size_t>(l)];
        const Matrix& zin = cache.z[static_cast<std::size_t>(l)];
        const Matrix& tin = (l == 0) ? g_row : t_list[static_cast<std::size_t>(l) - 1];

        // phi/dW_l = au (x) z_{l-1} + as (x) t_{l-1};  phi/db_l = au.
        auto& dw = grads.w[static_cast<std::size_t>(l)];
        auto& db = grads.b[static_cast<std::size_t>(l)];
        for (int o = 0; o < layer.w.rows; ++o) {
            const double a_u = au.data[static_cast<std::size_t>(o)];
            const double a_s = as.data[static_cast<std::size_t>(o)];
            db[static_cast<std::size_t>(o)] += c * a_u;
            double* dwr = dw.row(o);
            const double* zr = zin.row(0);
            const double* tr = tin.row(0);
            for (int i = 0; i < layer.w.cols; ++i) dwr[i] += c * (a_u * zr[i] + a_s * tr[i]);
        }

        if (l == 0) break;

        Matrix dz, dt;
        linear_backward_input(au, layer.w, dz);  // phi/dz_{l-1}
        linear_backward_input(as, layer.w, dt);  // phi/dt_{l-1}

        Matrix au_prev(1, p.layers[static_cast<std::size_t>(l) - 1].w.rows, 0.0);
        Matrix as_prev(1, p.layers[static_cast<std::size_t>(l) - 1].w.rows, 0.0);
        const Matrix& s_prev = s_list[static_cast<std::size_t>(l) - 1];
        for (int i = 0; i < au_prev.cols; ++i) {
            const double d1 = dact(l - 1, i);
            const double d2 = d2act(l - 1, i);
            au_prev.data[static_cast<std::size_t>(i)] =
                d1 * dz.data[static_cast<std::size_t>(i)] +
                d2 * s_prev.data[static_cast<std::size_t>(i)] * dt.data[static_cast<std::size_t>(i)];
            as_prev.data[static_cast<std::size_t>(i)] = d1 * dt.data[static_cast<std::size_t>(i)];
        }
        au = std::move(au_prev);
        as = std::move(as_prev);
    }
    return penalty;
}

// ---- checkpoint io -------------------------------------------------------
//
// Text format, one value per token in C hexfloat so round-trips are
// bit-exact:
//   mlp-checkpoint v1
//   layers <n>
//   layer <out> <in> <act>
//   <out*in weight tokens> <out bias tokens>

inline void write_mlp(std::ostream& os, const MlpParams& p) {
    os << "mlp-checkpoint v1\n";
    os << "layers " << p.layers.size() << "\n";
    char buf[64];
    for (const auto& layer : p.layers) {
        os << "layer " << layer.w.rows << " " << layer.w.cols << " " << act_name(layer.act) << "\n";
        for (double v : layer.w.data) {
            std::snprintf(buf, sizeof buf, "%a", v);
            os << buf << " ";
        }
        os << "\n";
        for (double v : layer.b) {
            std::snprintf(buf, sizeof buf, "%a", v);
            os << buf << " ";
        }
        os << "\n";
    }
}

inline double read_hex_double(std::istream& is) {
    std::string tok;
    if (!(is >> tok)) throw IoError("mlp checkpoint: truncated value stream");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str()) throw IoError("mlp checkpoint: bad value token '" + tok + "'");
    return v;
}

inline MlpParams read_mlp(std::istream& is) {
    std::string word, ver;
    if (!(is >> word >> ver) || word != "mlp-checkpoint" || ver != "v1")
        throw IoError("mlp checkpoint: bad header");
    std::size_t n = 0;
    if (!(is >> word >> n) || word != "layers") throw IoError("mlp checkpoint: missing layer count");
    MlpParams p;
    for (std::size_t l = 0; l < n; ++l) {
        int out = 0, in = 0;
        std::string act;
        if (!(is >> word >> out >> in >> act) || word != "layer" || out <= 0 || in <= 0)
            throw IoError("mlp checkpoint: bad layer header");
        MlpLayer layer;
        layer.w = Matrix(out, in);
        layer.b.assign(static_cast<std::size_t>(out), 0.0);
        layer.act = act_from_name(act);
        for (double& v : layer.w.data) v = read_hex_double(is);
        for (double& v : layer.b) v = read_hex_double(is);
        p.layers.push_back(std::move(layer));
    }
    return p;
}

}  // namespace sail
