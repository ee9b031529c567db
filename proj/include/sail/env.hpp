#pragma once

#include <memory>
#include <numeric>

#include "sail/common.hpp"

namespace sail {

struct EnvSpec {
    int state_dim = 0;
    int action_dim = 0;
    Vec action_low;
    Vec action_high;
    int max_steps = 0;
};

// One environment step. `dense_reward` is the hidden per-step reward used for
// sparsification, diagnostics and evaluation; sparse learners never see it.
struct StepResult {
    Vec next_state;
    double dense_reward = 0.0;
    int terminal = 0;  // 1 iff next_state is a true absorbing state
    bool timeout = false;
};

struct Transition {
    Vec s;
    Vec a;
    Vec s_next;
    int i = 0;           // terminal indicator
    double r_e = 0.0;    // episodic reward, nonzero only on a terminal final step
    double dense = 0.0;  // hidden per-step reward (dense-reward variants only)
};

struct Trajectory {
    std::vector<Transition> transitions;
    double episodic_return = 0.0;  // hidden dense-reward sum, revealed as r_e at a terminal

    bool reached_terminal() const { return !transitions.empty() && transitions.back().i == 1; }
    std::size_t size() const { return transitions.size(); }
};

class Env {
  public:
    virtual ~Env() = default;
    virtual const EnvSpec& spec() const = 0;
    virtual const char* name() const = 0;
    virtual Vec reset(Rng& rng) = 0;
    virtual StepResult step(const Vec& action, Rng& rng) = 0;
    virtual std::unique_ptr<Env> clone() const = 0;
};

// Collapses per-step dense rewards into a single episodic reward on the final
// transition, revealed only when the episode ended at a true terminal.
inline Trajectory sparsify_trajectory(std::vector<Transition> steps, int max_steps) {
    if (steps.empty()) throw UsageError("sparsify_trajectory: empty trajectory");
    const bool terminal = steps.back().i == 1;
    const bool timeout = static_cast<int>(steps.size()) >= max_steps;
    if (!terminal && !timeout) throw UsageError("sparsify_trajectory: trajectory is incomplete");

    double total = 0.0;
    for (auto& t : steps) {
        total += t.dense;
        t.r_e = 0.0;
    }
    if (terminal) steps.back().r_e = total;

    Trajectory traj;
    traj.transitions = std::move(steps);
    traj.episodic_return = total;
    return traj;
}

inline Vec clip_action(const EnvSpec& spec, Vec a) {
    if (static_cast<int>(a.size()) != spec.action_dim) throw UsageError("action dimension mismatch");
    for (int d = 0; d < spec.action_dim; ++d)
        a[static_cast<std::size_t>(d)] =
            clamp(a[static_cast<std::size_t>(d)], spec.action_low[static_cast<std::size_t>(d)],
                  spec.action_high[static_cast<std::size_t>(d)]);
    return a;
}

}  // namespace sail
