#pragma once

#include "sail/adam.hpp"
#include "sail/env.hpp"
#include "sail/nn.hpp"

namespace sail {

// Binary classifier over (s,a) features: positive class is the teacher
// buffer, negative class the self buffer. Its clamped output feeds the shaped
// reward -log(1 - D).
struct Discriminator {
    MlpParams net;  // sigmoid head
    OptState opt;
    double gp_coeff = 10.0;
    double clamp_eps = 1e-6;
    long updates = 0;

    double logit_cap() const { return std::log((1.0 - clamp_eps) / clamp_eps); }
};

inline Discriminator make_discriminator(int input_dim, const std::vector<int>& hidden, double lr, double gp_coeff,
                                        Rng& rng) {
    Discriminator d;
    d.net = make_mlp(input_dim, hidden, 1, Act::tanh, Act::sigmoid, rng);
    d.opt = OptState::for_params(d.net, lr);
    d.gp_coeff = gp_coeff;
    return d;
}

// Feature vector fed to the discriminator: state concatenated with the
// action mapped into [-1,1] by the declared bounds.
inline Vec disc_features(const EnvSpec& spec, const Vec& s, const Vec& a) {
    Vec x = s;
    x.reserve(s.size() + a.size());
    for (int d = 0; d < spec.action_dim; ++d) {
        const double lo = spec.action_low[static_cast<std::size_t>(d)];
        const double hi = spec.action_high[static_cast<std::size_t>(d)];
        x.push_back(2.0 * (a[static_cast<std::size_t>(d)] - lo) / (hi - lo) - 1.0);
    }
    return x;
}

inline double disc_logit(const Discriminator& disc, const Vec& x) { return mlp_forward_logit(disc.net, x)[0]; }

inline double disc_prob(const Discriminator& disc, const Vec& x) { return sigmoid(disc_logit(disc, x)); }

// r'(x) = -log(1 - clamp(D(x))), computed from the logit: softplus of the
// capped logit is the exact clamped value with no catastrophic cancellation.
inline double shaped_reward_from_logit(const Discriminator& disc, double logit) {
    const double cap = disc.logit_cap();
    return softplus(clamp(logit, -cap, cap));
}

inline double shaped_reward(const Discriminator& disc, const Vec& x) {
    return shaped_reward_from_logit(disc, disc_logit(disc, x));
}

inline Vec shaped_rewards_batch(const Discriminator& disc, const Matrix& x) {
    ForwardCache cache;
    mlp_forward_batch(disc.net, x, &cache);
    const Matrix& logits = cache.u.back();
    Vec out(static_cast<std::size_t>(x.rows));
    for (int n = 0; n < x.rows; ++n) out[static_cast<std::size_t>(n)] = shaped_reward_from_logit(disc, logits.at(n, 0));
    return out;
}

namespace detail {

inline double bce_objective(const Discriminator& disc, const Matrix& teacher_x, const Matrix& self_x) {
    ForwardCache ct, cs;
    mlp_forward_batch(disc.net, teacher_x, &ct);
    mlp_forward_batch(disc.net, self_x, &cs);
    const double eps = disc.clamp_eps;
    double loss = 0.0;
    for (int n = 0; n < teacher_x.rows; ++n)
        loss -= std::log(std::max(sigmoid(ct.u.back().at(n, 0)), eps)) / teacher_x.rows;
    for (int n = 0; n < self_x.rows; ++n)
        loss -= std::log(std::max(1.0 - sigmoid(cs.u.back().at(n, 0)), eps)) / self_x.rows;
    return loss;
}

}  // namespace detail

// One ascent step on  E_T[log D] + E_B[log(1-D)] - gp * E[(||grad_x D|| - 1)^2]
// with interpolates between paired teacher/self samples. Returns the
// objective's negative (the minimized loss) re-evaluated after the step.
inline double disc_update(Discriminator& disc, const std::vector<Vec>& teacher_batch,
                          const std::vector<Vec>& self_batch, Rng& rng) {
    if (teacher_batch.empty() || teacher_batch.size() != self_batch.size())
        throw ConfigError("disc_update: batches must be non-empty and equal-sized");
    const int n = static_cast<int>(teacher_batch.size());
    const int dim = disc.net.in_dim();
    for (const Vec& x : teacher_batch)
        if (static_cast<int>(x.size()) != dim) throw ConfigError("disc_update: teacher feature dim mismatch");
    for (const Vec& x : self_batch)
        if (static_cast<int>(x.size()) != dim) throw ConfigError("disc_update: self feature dim mismatch");

    Matrix xt(n, dim), xb(n, dim);
    for (int k = 0; k < n; ++k) {
        xt.set_row(k, teacher_batch[static_cast<std::size_t>(k)]);
        xb.set_row(k, self_batch[static_cast<std::size_t>(k)]);
    }

    MlpGrads grads = MlpGrads::zeros_like(disc.net);

    // Fused sigmoid+BCE gradient at the final preactivation: (D - y) / n.
    ForwardCache ct, cs;
    mlp_forward_batch(disc.net, xt, &ct);
    mlp_forward_batch(disc.net, xb, &cs);
    Matrix du_t(n, 1), du_b(n, 1);
    for (int k = 0; k < n; ++k) {
        du_t.at(k, 0) = (sigmoid(ct.u.back().at(k, 0)) - 1.0) / n;
        du_b.at(k, 0) = sigmoid(cs.u.back().at(k, 0)) / n;
    }
    mlp_backward_preact_batch(disc.net, ct, du_t, grads);
    mlp_backward_preact_batch(disc.net, cs, du_b, grads);

    // Gradient penalty on interpolates x^ = u x_T + (1-u) x_B, u ~ U(0,1),
    // applied to the logit head (the unbounded critic of the WGAN-GP
    // construction; penalizing the sigmoid output would forbid the flat
    // D = 1/2 equilibrium).
    if (disc.gp_coeff > 0.0) {
        for (int k = 0; k < n; ++k) {
            const double u = uniform(rng, 0.0, 1.0);
            Vec x(static_cast<std::size_t>(dim));
            for (int d = 0; d < dim; ++d) x[static_cast<std::size_t>(d)] = u * xt.at(k, d) + (1.0 - u) * xb.at(k, d);
            accumulate_gradient_penalty(disc.net, x, disc.gp_coeff / n, grads, /*at_preact=*/true);
        }
    }

    adam_step(disc.opt, disc.net, grads);
    disc.updates += 1;

    // Post-step value of the minimized BCE objective on the same batch.
    return detail::bce_objective(disc, xt, xb);
}

// The on-policy ablation trains the same objective; only the negative-class
// source differs (fresh rollouts of the current policy instead of the replay
// buffer), which is the caller's responsibility.
inline double onpolicy_disc_update(Discriminator& disc, const std::vector<Vec>& teacher_batch,
                                   const std::vector<Vec>& fresh_policy_batch, Rng& rng) {
    return disc_update(disc, teacher_batch, fresh_policy_batch, rng);
}

}  // namespace sail
