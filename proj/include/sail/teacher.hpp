#pragma once

#include "sail/chain_mdp.hpp"
#include "sail/env.hpp"
#include "sail/point_mass.hpp"

namespace sail {

inline std::unique_ptr<Env> make_env(const std::string& name) {
    if (name == "pointmass") return std::make_unique<PointMass2D>();
    if (name == "chain") return std::make_unique<ChainMDP>();
    throw ConfigError("unknown env: " + name);
}

// Detuned controller with a quality knob q in (0,1]: q scales the commanded
// cruise speed toward the goal, (1-q) scales additive Gaussian noise. q = 1
// is the near-optimal limit; anything above random and below optimal in
// between.
struct ScriptedTeacher {
    std::string env;
    double quality = 1.0;
};

inline ScriptedTeacher make_teacher(const std::string& env_name, double quality) {
    if (!(quality > 0.0 && quality <= 1.0))
        throw ConfigError("teacher quality must lie in (0, 1], got " + std::to_string(quality));
    if (env_name != "pointmass" && env_name != "chain") throw ConfigError("unknown teacher env: " + env_name);
    return {env_name, quality};
}

// The deterministic q=1 controller for PointMass2D: track a cruise velocity
// pointed at the goal (P on position through the velocity target, D on
// velocity through the tracking term).
inline Vec point_mass_pd_action(const Vec& state, double quality) {
    constexpr double kPosGain = 4.0;
    constexpr double kVelGain = 5.0;
    const double ex = PointMass2D::kGoalX - state[0];
    const double ey = PointMass2D::kGoalY - state[1];
    Vec a(2, 0.0);
    const double vx_tgt = quality * clamp(kPosGain * ex, -1.0, 1.0);
    const double vy_tgt = quality * clamp(kPosGain * ey, -1.0, 1.0);
    a[0] = clamp(kVelGain * (vx_tgt - state[2]), -1.0, 1.0);
    a[1] = clamp(kVelGain * (vy_tgt - state[3]), -1.0, 1.0);
    return a;
}

inline Vec teacher_action(const ScriptedTeacher& teacher, const Vec& state, Rng& rng) {
    if (teacher.env == "pointmass") {
        constexpr double kNoiseScale = 0.6;
        Vec a = point_mass_pd_action(state, teacher.quality);
        for (double& v : a) v = clamp(v + (1.0 - teacher.quality) * kNoiseScale * gaussian(rng, 0.0, 1.0), -1.0, 1.0);
        return a;
    }
    // chain: head right with probability 0.5 + q/2, else left
    const double p_right = 0.5 + 0.5 * teacher.quality;
    return {uniform(rng, 0.0, 1.0) < p_right ? 1.0 : -1.0};
}

template <typename Policy>
Trajectory rollout(Env& env, Policy&& policy, Rng& rng) {
    std::vector<Transition> steps;
    Vec s = env.reset(rng);
    for (int t = 0; t < env.spec().max_steps; ++t) {
        Vec a = clip_action(env.spec(), policy(s, rng));
        StepResult r = env.step(a, rng);
        Transition tr;
        tr.s = s;
        tr.a = a;
        tr.s_next = r.next_state;
        tr.i = r.terminal;
        tr.dense = r.dense_reward;
        steps.push_back(std::move(tr));
        s = r.next_state;
        if (r.terminal || r.timeout) break;
    }
    return sparsify_trajectory(std::move(steps), env.spec().max_steps);
}

inline Trajectory random_rollout(Env& env, Rng& rng) {
    const EnvSpec& spec = env.spec();
    return rollout(
        env,
        [&spec](const Vec&, Rng& r) {
            Vec a(static_cast<std::size_t>(spec.action_dim));
            for (int d = 0; d < spec.action_dim; ++d)
                a[static_cast<std::size_t>(d)] = uniform(r, spec.action_low[static_cast<std::size_t>(d)],
                                                         spec.action_high[static_cast<std::size_t>(d)]);
            return a;
        },
        rng);
}

struct DemoSet {
    std::vector<Trajectory> trajectories;
    double quality = 0.0;
    double teacher_mean = 0.0;
    double random_mean = 0.0;   // 20-episode random-policy baseline
    bool assumption1_ok = false;  // teacher mean strictly above the baseline
};

inline DemoSet generate_demonstrations(Env& env, const ScriptedTeacher& teacher, int n_traj, Rng& rng) {
    if (n_traj < 1) throw ConfigError("generate_demonstrations: n_traj must be >= 1");
    DemoSet out;
    out.quality = teacher.quality;
    double total = 0.0;
    for (int k = 0; k < n_traj; ++k) {
        Trajectory traj =
            rollout(env, [&teacher](const Vec& s, Rng& r) { return teacher_action(teacher, s, r); }, rng);
        total += traj.episodic_return;
        out.trajectories.push_back(std::move(traj));
    }
    out.teacher_mean = total / n_traj;

    double rnd = 0.0;
    constexpr int kBaselineEpisodes = 20;
    for (int k = 0; k < kBaselineEpisodes; ++k) rnd += random_rollout(env, rng).episodic_return;
    out.random_mean = rnd / kBaselineEpisodes;
    out.assumption1_ok = out.teacher_mean > out.random_mean;
    return out;
}

}  // namespace sail
