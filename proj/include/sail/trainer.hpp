#pragma once

#include <functional>
#include <optional>

#include "sail/agent.hpp"
#include "sail/config.hpp"
#include "sail/runlog.hpp"
#include "sail/teacher.hpp"

namespace sail {

// Behavior deltas per algorithm tag.
struct VariantTraits {
    bool uses_demos = true;
    bool uses_disc = true;
    bool onpolicy_disc = false;
    bool promotion_enabled = true;
    bool anneal_enabled = true;
    bool bc_only = false;
    enum class Reward { shaped, sparse, dense, pofd } reward = Reward::shaped;
    double fixed_alpha = -1.0;  // >= 0 forces a constant alpha
};

inline VariantTraits variant_traits(const std::string& algo) {
    VariantTraits t;
    if (algo == "sail") return t;
    if (algo == "sail-fixed-alpha") {
        t.anneal_enabled = false;
        return t;
    }
    if (algo == "sail-no-lfd") {
        t.fixed_alpha = 0.0;
        t.anneal_enabled = false;
        return t;
    }
    if (algo == "sail-no-adapt") {
        t.promotion_enabled = false;
        return t;
    }
    if (algo == "sail-onpolicy") {
        t.onpolicy_disc = true;
        return t;
    }
    if (algo == "td3-sparse") {
        t.uses_demos = false;
        t.uses_disc = false;
        t.promotion_enabled = false;
        t.anneal_enabled = false;
        t.fixed_alpha = 0.0;
        t.reward = VariantTraits::Reward::sparse;
        return t;
    }
    if (algo == "td3-dense") {
        t.uses_demos = false;
        t.uses_disc = false;
        t.promotion_enabled = false;
        t.anneal_enabled = false;
        t.fixed_alpha = 0.0;
        t.reward = VariantTraits::Reward::dense;
        return t;
    }
    if (algo == "bc") {
        t.uses_disc = false;
        t.promotion_enabled = false;
        t.anneal_enabled = false;
        t.bc_only = true;
        return t;
    }
    if (algo == "pofd-mix") {
        t.reward = VariantTraits::Reward::pofd;
        return t;
    }
    throw ConfigError("unknown algo: " + algo);
}

// Deterministic-policy evaluation on a fresh environment instance; returns
// mean and population std of the hidden dense-sum returns. Never touches the
// replay buffers.
inline std::pair<double, double> evaluate(const Actor& actor, const Env& env_proto, int n_episodes, Rng& rng) {
    if (n_episodes < 1) throw UsageError("evaluate: n_episodes must be >= 1");
    auto env = env_proto.clone();
    std::vector<double> returns;
    returns.reserve(static_cast<std::size_t>(n_episodes));
    for (int k = 0; k < n_episodes; ++k) {
        Trajectory traj = rollout(
            *env, [&actor](const Vec& s, Rng& r) { return select_action(actor, s, ActionMode::evaluate, r); }, rng);
        returns.push_back(traj.episodic_return);
    }
    double mean = 0.0;
    for (double r : returns) mean += r / n_episodes;
    double var = 0.0;
    for (double r : returns) var += (r - mean) * (r - mean) / n_episodes;
    return {mean, std::sqrt(var)};
}

struct TrainResult {
    RunLog log;
    Actor actor;
    Critic critic;
    long promotions = 0;
    long train_env_steps = 0;
    bool assumption1_ok = true;
};

using RecordSink = std::function<void(const RunRecord&)>;

// Runs the full training loop for any variant: collect a trajectory with
// exploration noise, push it to the self buffer, promote it into the teacher
// buffer when its episodic score strictly beats the threshold (annealing
// alpha on success), then apply the cadenced discriminator / critic / delayed
// actor updates over mixture batches. Fully reproducible per seed.
inline TrainResult train(const TrainConfig& config, const std::vector<Trajectory>& demos, Rng& rng,
                         const RecordSink& sink = nullptr) {
    config.validate();
    const VariantTraits traits = variant_traits(config.algo);
    if (traits.uses_demos && demos.empty())
        throw ConfigError("algo " + config.algo + " requires demonstrations");

    auto env = make_env(config.env);
    const EnvSpec& spec = env->spec();

    Actor actor = make_actor(spec, config.actor_hidden, config.actor_lr, rng);
    actor.sigma_act = config.sigma_act;
    actor.sigma_tgt = config.sigma_tgt;
    actor.noise_clip = config.noise_clip;
    Critic critic = make_critic(spec, config.critic_hidden, config.critic_lr, !config.single_q, rng);
    critic.gamma = config.gamma;
    critic.tau = config.tau;
    Discriminator disc = make_discriminator(spec.state_dim + spec.action_dim, config.disc_hidden, config.disc_lr,
                                            config.gp_coeff, rng);
    disc.clamp_eps = config.disc_clamp_eps;

    SelfBuffer selfbuf(static_cast<std::size_t>(config.self_capacity));
    TeacherBuffer teacherbuf(static_cast<std::size_t>(config.teacher_capacity));
    if (traits.uses_demos) teacherbuf.initialize(demos);

    auto sampler = MixtureSampler::make(
        traits.fixed_alpha >= 0.0 ? traits.fixed_alpha : config.alpha_init,
        config.alpha_anneal == "step" ? MixtureSampler::Anneal::step : MixtureSampler::Anneal::linear,
        config.alpha_anneal_events);

    TrainResult result{.log = {}, .actor = std::move(actor), .critic = std::move(critic)};

    // Assumption screen: demo returns against a 20-episode random baseline.
    // Failure warns (via the flag) but training proceeds.
    if (traits.uses_demos) {
        double rnd = 0.0;
        constexpr int kBaselineEpisodes = 20;
        for (int k = 0; k < kBaselineEpisodes; ++k) rnd += random_rollout(*env, rng).episodic_return / kBaselineEpisodes;
        double demo_mean = 0.0;
        for (const auto& d : demos) demo_mean += d.episodic_return / static_cast<double>(demos.size());
        result.assumption1_ok = demo_mean > rnd;
    }

    double last_disc_loss = 0.0;
    double last_critic_loss = 0.0;
    double last_train_return = 0.0;

    const auto threshold_or_zero = [&]() {
        return teacherbuf.num_trajectories() > 0 ? teacherbuf.threshold() : 0.0;
    };

    const auto emit = [&](long steps) {
        auto [mean, sd] = evaluate(result.actor, *env, config.eval_episodes, rng);
        RunRecord rec;
        rec.env_steps = steps;
        rec.eval_mean_return = mean;
        rec.eval_std = sd;
        rec.train_episode_return = last_train_return;
        rec.teacher_threshold = threshold_or_zero();
        rec.alpha = sampler.alpha;
        rec.disc_loss = last_disc_loss;
        rec.critic_loss = last_critic_loss;
        rec.promotions_count = result.promotions;
        if (!std::isfinite(mean)) throw NumericError("evaluation diverged to a non-finite return");
        result.log.records.push_back(rec);
        if (sink) sink(rec);
    };

    emit(0);

    if (traits.bc_only) {
        // Supervised-only baseline: total_env_steps counts optimizer steps
        // here; no training interaction with the environment happens at all.
        for (long step = 1; step <= config.total_env_steps; ++step) {
            std::vector<Transition> batch;
            batch.reserve(static_cast<std::size_t>(config.batch_size));
            for (int k = 0; k < config.batch_size; ++k) batch.push_back(teacherbuf.sample(rng));
            last_critic_loss = bc_update(result.actor, batch);
            if (step % config.eval_every == 0) emit(step);
        }
        if (config.total_env_steps % config.eval_every != 0) emit(config.total_env_steps);
        return result;
    }

    long steps = 0;
    long disc_due = 0;
    long critic_due = 0;
    long next_eval = config.eval_every;
    std::vector<Transition> fresh;  // current-policy transitions for the on-policy ablation

    const auto teacher_feature_batch = [&](int n) {
        std::vector<Vec> out;
        out.reserve(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const Transition& t = teacherbuf.sample(rng);
            out.push_back(disc_features(spec, t.s, t.a));
        }
        return out;
    };
    const auto negative_feature_batch = [&](int n) {
        std::vector<Vec> out;
        out.reserve(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const Transition& t = traits.onpolicy_disc
                                      ? fresh[static_cast<std::size_t>(rng() % fresh.size())]
                                      : selfbuf.sample(rng);
            out.push_back(disc_features(spec, t.s, t.a));
        }
        return out;
    };

    const auto batch_rewards = [&](const MixedBatch& batch) {
        Vec r;
        switch (traits.reward) {
            case VariantTraits::Reward::shaped:
                return shaped_rewards_for_batch(disc, spec, batch);
            case VariantTraits::Reward::pofd: {
                r = shaped_rewards_for_batch(disc, spec, batch);
                for (std::size_t k = 0; k < batch.size(); ++k) r[k] += config.pofd_lambda * batch.items[k].r_e;
                return r;
            }
            case VariantTraits::Reward::sparse:
                for (const auto& t : batch.items) r.push_back(t.r_e);
                return r;
            case VariantTraits::Reward::dense:
                for (const auto& t : batch.items) r.push_back(t.dense);
                return r;
        }
        return r;
    };

    while (steps < config.total_env_steps) {
        // Collect one complete trajectory (random actions during warm-up).
        const bool warmup = steps < config.warmup_steps;
        std::vector<Transition> ep;
        Vec s = env->reset(rng);
        for (int t = 0; t < spec.max_steps; ++t) {
            Vec a;
            if (warmup) {
                a.resize(static_cast<std::size_t>(spec.action_dim));
                for (int d = 0; d < spec.action_dim; ++d)
                    a[static_cast<std::size_t>(d)] = uniform(rng, spec.action_low[static_cast<std::size_t>(d)],
                                                             spec.action_high[static_cast<std::size_t>(d)]);
            } else {
                a = select_action(result.actor, s, ActionMode::explore, rng);
            }
            StepResult sr = env->step(a, rng);
            Transition tr;
            tr.s = s;
            tr.a = a;
            tr.s_next = sr.next_state;
            tr.i = sr.terminal;
            tr.dense = sr.dense_reward;
            ep.push_back(std::move(tr));
            s = sr.next_state;
            if (sr.terminal || sr.timeout) break;
        }
        Trajectory traj = sparsify_trajectory(std::move(ep), spec.max_steps);
        steps += static_cast<long>(traj.size());
        last_train_return = traj.episodic_return;

        for (const auto& t : traj.transitions) selfbuf.push(t);
        if (traits.onpolicy_disc) fresh = traj.transitions;

        bool promoted = false;
        if (traits.promotion_enabled && traits.uses_demos && !warmup) {
            promoted = teacherbuf.maybe_promote(traj);
            if (promoted) result.promotions += 1;
        }
        if (traits.anneal_enabled) anneal_alpha(sampler, promoted);

        if (!warmup) {
            disc_due += static_cast<long>(traj.size());
            critic_due += static_cast<long>(traj.size());
        }

        while (traits.uses_disc && disc_due >= config.disc_update_every) {
            disc_due -= config.disc_update_every;
            for (long k = 0; k < config.disc_grad_steps; ++k) {
                auto pos = teacher_feature_batch(config.batch_size);
                auto neg = negative_feature_batch(config.batch_size);
                last_disc_loss = traits.onpolicy_disc ? onpolicy_disc_update(disc, pos, neg, rng)
                                                      : disc_update(disc, pos, neg, rng);
            }
            if (!std::isfinite(last_disc_loss)) throw NumericError("discriminator loss diverged");
        }

        while (critic_due >= config.critic_update_every) {
            critic_due -= config.critic_update_every;
            for (long k = 0; k < config.critic_grad_steps; ++k) {
                MixedBatch batch = sample_mixture(selfbuf, teacherbuf, sampler,
                                                  static_cast<std::size_t>(config.batch_size), rng);
                last_critic_loss = critic_update(result.critic, result.actor, batch, batch_rewards(batch), rng);
                if (result.critic.updates % config.policy_delay == 0) {
                    Matrix states = detail::states_matrix(batch, false);
                    actor_update(result.actor, result.critic, states);
                }
            }
            if (!std::isfinite(last_critic_loss)) throw NumericError("critic loss diverged");
        }

        if (steps >= next_eval) {
            emit(steps);
            next_eval = steps - steps % config.eval_every + config.eval_every;
        }
    }

    result.train_env_steps = steps;
    if (result.log.records.empty() || result.log.records.back().env_steps < steps) emit(steps);
    return result;
}

}  // namespace sail
