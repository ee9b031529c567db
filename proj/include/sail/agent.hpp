#pragma once

#include "sail/adam.hpp"
#include "sail/buffers.hpp"
#include "sail/discriminator.hpp"

namespace sail {

// Maps the actor's tanh output onto the declared action box.
struct ActionScale {
    Vec center;
    Vec half;

    static ActionScale from_spec(const EnvSpec& spec) {
        ActionScale s;
        for (int d = 0; d < spec.action_dim; ++d) {
            const double lo = spec.action_low[static_cast<std::size_t>(d)];
            const double hi = spec.action_high[static_cast<std::size_t>(d)];
            s.center.push_back(0.5 * (lo + hi));
            s.half.push_back(0.5 * (hi - lo));
        }
        return s;
    }

    Vec apply(const Vec& tanh_out) const {
        Vec a(tanh_out.size());
        for (std::size_t d = 0; d < a.size(); ++d) a[d] = center[d] + half[d] * tanh_out[d];
        return a;
    }
};

struct Actor {
    MlpParams pi;
    MlpParams pi_target;
    OptState opt;
    ActionScale scale;
    EnvSpec env_spec;
    double sigma_act = 0.1;
    double sigma_tgt = 0.2;
    double noise_clip = 0.5;
    long updates = 0;
};

struct Critic {
    MlpParams q1, q2;
    MlpParams q1_target, q2_target;
    OptState opt1, opt2;
    double gamma = 0.99;
    double tau = 0.005;
    bool twin = true;
    long updates = 0;
};

inline Actor make_actor(const EnvSpec& spec, const std::vector<int>& hidden, double lr, Rng& rng) {
    Actor a;
    // Output layer scaled down so a fresh policy starts near zero actions.
    a.pi = make_mlp(spec.state_dim, hidden, spec.action_dim, Act::relu, Act::tanh, rng, 1e-2);
    a.pi_target = a.pi;
    a.opt = OptState::for_params(a.pi, lr);
    a.scale = ActionScale::from_spec(spec);
    a.env_spec = spec;
    return a;
}

inline Critic make_critic(const EnvSpec& spec, const std::vector<int>& hidden, double lr, bool twin, Rng& rng) {
    Critic c;
    c.q1 = make_mlp(spec.state_dim + spec.action_dim, hidden, 1, Act::relu, Act::identity, rng);
    c.q2 = make_mlp(spec.state_dim + spec.action_dim, hidden, 1, Act::relu, Act::identity, rng);
    c.q1_target = c.q1;
    c.q2_target = c.q2;
    c.opt1 = OptState::for_params(c.q1, lr);
    c.opt2 = OptState::for_params(c.q2, lr);
    c.twin = twin;
    return c;
}

enum class ActionMode { explore, evaluate };

inline Vec select_action(const Actor& actor, const Vec& state, ActionMode mode, Rng& rng) {
    Vec a = actor.scale.apply(mlp_forward(actor.pi, state));
    if (mode == ActionMode::explore) {
        for (std::size_t d = 0; d < a.size(); ++d)
            a[d] += actor.sigma_act * actor.scale.half[d] * gaussian(rng, 0.0, 1.0);
    }
    return clip_action(actor.env_spec, std::move(a));
}

namespace detail {

inline Matrix states_matrix(const MixedBatch& batch, bool next) {
    const int n = static_cast<int>(batch.size());
    const int dim = static_cast<int>(batch.items.front().s.size());
    Matrix m(n, dim);
    for (int k = 0; k < n; ++k) m.set_row(k, next ? batch.items[static_cast<std::size_t>(k)].s_next
                                                  : batch.items[static_cast<std::size_t>(k)].s);
    return m;
}

inline Matrix state_action_matrix(const Matrix& s, const Matrix& a) {
    Matrix m(s.rows, s.cols + a.cols);
    for (int k = 0; k < s.rows; ++k) {
        for (int d = 0; d < s.cols; ++d) m.at(k, d) = s.at(k, d);
        for (int d = 0; d < a.cols; ++d) m.at(k, s.cols + d) = a.at(k, d);
    }
    return m;
}

}  // namespace detail

// Shaped rewards recomputed from the current discriminator at update time.
inline Vec shaped_rewards_for_batch(const Discriminator& disc, const EnvSpec& spec, const MixedBatch& batch) {
    const int n = static_cast<int>(batch.size());
    Matrix x(n, disc.net.in_dim());
    for (int k = 0; k < n; ++k)
        x.set_row(k, disc_features(spec, batch.items[static_cast<std::size_t>(k)].s,
                                   batch.items[static_cast<std::size_t>(k)].a));
    return shaped_rewards_batch(disc, x);
}

// One TD step on the critics toward y = r + gamma (1-i) min(q1,q2)(s', a')
// with a' the smoothed target action. Returns the batch mean squared TD
// error before the step.
inline double critic_update(Critic& critic, const Actor& actor, const MixedBatch& batch, const Vec& rewards,
                            Rng& rng) {
    if (batch.size() == 0) throw UsageError("critic_update: empty batch");
    const int n = static_cast<int>(batch.size());

    Matrix s = detail::states_matrix(batch, false);
    Matrix s_next = detail::states_matrix(batch, true);

    // Smoothed deterministic target action.
    Matrix a_next = mlp_forward_batch(actor.pi_target, s_next);
    for (int k = 0; k < n; ++k)
        for (int d = 0; d < a_next.cols; ++d) {
            const std::size_t dd = static_cast<std::size_t>(d);
            double a = actor.scale.center[dd] + actor.scale.half[dd] * a_next.at(k, d);
            const double noise = clamp(actor.sigma_tgt * gaussian(rng, 0.0, 1.0), -actor.noise_clip,
                                       actor.noise_clip) *
                                 actor.scale.half[dd];
            a_next.at(k, d) = clamp(a + noise, actor.env_spec.action_low[dd], actor.env_spec.action_high[dd]);
        }

    Matrix sa_next = detail::state_action_matrix(s_next, a_next);
    Matrix q1n = mlp_forward_batch(critic.q1_target, sa_next);
    Matrix q2n = critic.twin ? mlp_forward_batch(critic.q2_target, sa_next) : q1n;

    Vec y(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const auto& t = batch.items[static_cast<std::size_t>(k)];
        const double qmin = critic.twin ? std::min(q1n.at(k, 0), q2n.at(k, 0)) : q1n.at(k, 0);
        y[static_cast<std::size_t>(k)] =
            rewards[static_cast<std::size_t>(k)] + critic.gamma * (1.0 - t.i) * qmin;
    }

    Matrix a(n, static_cast<int>(batch.items.front().a.size()));
    for (int k = 0; k < n; ++k) a.set_row(k, batch.items[static_cast<std::size_t>(k)].a);
    Matrix sa = detail::state_action_matrix(s, a);

    double td = 0.0;
    auto step_one = [&](MlpParams& q, OptState& opt, bool measure) {
        ForwardCache cache;
        Matrix out = mlp_forward_batch(q, sa, &cache);
        Matrix dy(n, 1);
        for (int k = 0; k < n; ++k) {
            const double err = out.at(k, 0) - y[static_cast<std::size_t>(k)];
            if (measure) td += err * err / n;
            dy.at(k, 0) = 2.0 * err / n;
        }
        MlpGrads grads = MlpGrads::zeros_like(q);
        mlp_backward_batch(q, cache, dy, grads);
        adam_step(opt, q, grads);
    };
    step_one(critic.q1, critic.opt1, true);
    if (critic.twin) step_one(critic.q2, critic.opt2, false);
    critic.updates += 1;
    return td;
}

inline double critic_update(Critic& critic, const Actor& actor, const Discriminator& disc, const MixedBatch& batch,
                            Rng& rng) {
    return critic_update(critic, actor, batch, shaped_rewards_for_batch(disc, actor.env_spec, batch), rng);
}

// Gradient of  -mean_k q1(s_k, pi(s_k))  with respect to the actor
// parameters, by the deterministic policy-gradient chain rule.
inline std::pair<double, MlpGrads> actor_loss_gradient(const Actor& actor, const Critic& critic, const Matrix& states) {
    const int n = states.rows;
    ForwardCache pi_cache;
    Matrix tanh_out = mlp_forward_batch(actor.pi, states, &pi_cache);
    Matrix a(n, tanh_out.cols);
    for (int k = 0; k < n; ++k)
        for (int d = 0; d < a.cols; ++d) {
            const std::size_t dd = static_cast<std::size_t>(d);
            a.at(k, d) = actor.scale.center[dd] + actor.scale.half[dd] * tanh_out.at(k, d);
        }

    Matrix sa = detail::state_action_matrix(states, a);
    ForwardCache q_cache;
    Matrix q = mlp_forward_batch(critic.q1, sa, &q_cache);
    double loss = 0.0;
    for (int k = 0; k < n; ++k) loss -= q.at(k, 0) / n;

    Matrix dq(n, 1, -1.0 / n);
    MlpGrads q_scratch = MlpGrads::zeros_like(critic.q1);
    Matrix dsa = mlp_backward_batch(critic.q1, q_cache, dq, q_scratch);

    // Slice out d/da and push it through the action scaling into the actor.
    Matrix da(n, a.cols);
    for (int k = 0; k < n; ++k)
        for (int d = 0; d < a.cols; ++d)
            da.at(k, d) = dsa.at(k, states.cols + d) * actor.scale.half[static_cast<std::size_t>(d)];

    MlpGrads grads = MlpGrads::zeros_like(actor.pi);
    mlp_backward_batch(actor.pi, pi_cache, da, grads);
    return {loss, std::move(grads)};
}

// Delayed policy step: ascend q1 along the batch states, then let the targets
// track the online networks.
inline void actor_update(Actor& actor, Critic& critic, const Matrix& states) {
    auto [loss, grads] = actor_loss_gradient(actor, critic, states);
    adam_step(actor.opt, actor.pi, grads);
    actor.updates += 1;
    polyak_update(actor.pi_target, actor.pi, critic.tau);
    polyak_update(critic.q1_target, critic.q1, critic.tau);
    if (critic.twin) polyak_update(critic.q2_target, critic.q2, critic.tau);
}

// Behavior-cloning step: mean squared error between the policy action and
// the demonstrated action. Returns the pre-step MSE.
inline double bc_update(Actor& actor, const std::vector<Transition>& teacher_batch) {
    if (teacher_batch.empty()) throw UsageError("bc_update: empty batch");
    const int n = static_cast<int>(teacher_batch.size());
    Matrix s(n, static_cast<int>(teacher_batch.front().s.size()));
    for (int k = 0; k < n; ++k) s.set_row(k, teacher_batch[static_cast<std::size_t>(k)].s);

    ForwardCache cache;
    Matrix tanh_out = mlp_forward_batch(actor.pi, s, &cache);
    double mse = 0.0;
    Matrix dtanh(n, tanh_out.cols);
    for (int k = 0; k < n; ++k)
        for (int d = 0; d < tanh_out.cols; ++d) {
            const std::size_t dd = static_cast<std::size_t>(d);
            const double pred = actor.scale.center[dd] + actor.scale.half[dd] * tanh_out.at(k, d);
            const double err = pred - teacher_batch[static_cast<std::size_t>(k)].a[dd];
            mse += err * err / (n * tanh_out.cols);
            dtanh.at(k, d) = 2.0 * err * actor.scale.half[dd] / (n * tanh_out.cols);
        }
    MlpGrads grads = MlpGrads::zeros_like(actor.pi);
    mlp_backward_batch(actor.pi, cache, dtanh, grads);
    adam_step(actor.opt, actor.pi, grads);
    return mse;
}

// ---- agent checkpointing ---------------------------------------------------

inline void save_agent(std::ostream& os, const Actor& actor, const Critic& critic) {
    os << "agent-checkpoint v1\n";
    const std::pair<const char*, const MlpParams*> nets[] = {
        {"actor", &actor.pi},         {"actor_target", &actor.pi_target}, {"q1", &critic.q1},
        {"q1_target", &critic.q1_target}, {"q2", &critic.q2},             {"q2_target", &critic.q2_target},
    };
    for (const auto& [name, p] : nets) {
        os << "net " << name << "\n";
        write_mlp(os, *p);
    }
}

inline void load_agent(std::istream& is, Actor& actor, Critic& critic) {
    std::string word, ver;
    if (!(is >> word >> ver) || word != "agent-checkpoint" || ver != "v1")
        throw IoError("agent checkpoint: bad header");
    const std::pair<const char*, MlpParams*> nets[] = {
        {"actor", &actor.pi},         {"actor_target", &actor.pi_target}, {"q1", &critic.q1},
        {"q1_target", &critic.q1_target}, {"q2", &critic.q2},             {"q2_target", &critic.q2_target},
    };
    for (const auto& [name, p] : nets) {
        std::string tag, got;
        if (!(is >> tag >> got) || tag != "net" || got != name)
            throw IoError(std::string("agent checkpoint: expected net ") + name);
        *p = read_mlp(is);
    }
}

inline MlpParams load_actor_net(std::istream& is) {
    std::string word, ver, tag, name;
    if (!(is >> word >> ver) || word != "agent-checkpoint" || ver != "v1")
        throw IoError("agent checkpoint: bad header");
    if (!(is >> tag >> name) || tag != "net" || name != "actor") throw IoError("agent checkpoint: missing actor net");
    return read_mlp(is);
}

}  // namespace sail
