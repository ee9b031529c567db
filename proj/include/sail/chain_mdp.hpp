#pragma once

#include "sail/env.hpp"

namespace sail {

// Tabular chain with one-hot states and a 1-d action whose sign selects the
// direction. Moves succeed with probability 1 - slip, otherwise stay put.
// The last state is absorbing and pays the only reward. Small enough that
// occupancy measures and Q-values have exact closed forms.
class ChainMDP final : public Env {
  public:
    static constexpr int kStates = 8;
    static constexpr double kSlip = 0.1;

    explicit ChainMDP(int max_steps = 80) {
        spec_.state_dim = kStates;
        spec_.action_dim = 1;
        spec_.action_low = {-1.0};
        spec_.action_high = {1.0};
        spec_.max_steps = max_steps;
    }

    const EnvSpec& spec() const override { return spec_; }
    const char* name() const override { return "chain"; }

    Vec reset(Rng&) override {
        pos_ = 0;
        steps_ = 0;
        done_ = false;
        return one_hot(pos_);
    }

    StepResult step(const Vec& action, Rng& rng) override {
        if (done_) throw UsageError("ChainMDP: step() after the episode ended");
        const Vec a = clip_action(spec_, action);
        const bool right = a[0] >= 0.0;

        int next = pos_;
        if (uniform(rng, 0.0, 1.0) >= kSlip) next = right ? std::min(pos_ + 1, kStates - 1) : std::max(pos_ - 1, 0);
        steps_ += 1;

        StepResult r;
        r.dense_reward = (next == kStates - 1 && pos_ != kStates - 1) ? 1.0 : 0.0;
        r.terminal = next == kStates - 1 ? 1 : 0;
        r.timeout = !r.terminal && steps_ >= spec_.max_steps;
        pos_ = next;
        r.next_state = one_hot(pos_);
        done_ = r.terminal || r.timeout;
        return r;
    }

    std::unique_ptr<Env> clone() const override { return std::make_unique<ChainMDP>(*this); }

    static Vec one_hot(int k) {
        Vec v(kStates, 0.0);
        v[static_cast<std::size_t>(k)] = 1.0;
        return v;
    }

    int position() const { return pos_; }

  private:
    EnvSpec spec_;
    int pos_ = 0;
    int steps_ = 0;
    bool done_ = false;
};

}  // namespace sail
