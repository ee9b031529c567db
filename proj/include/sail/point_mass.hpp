#pragma once

#include "sail/env.hpp"

namespace sail {

// Double-integrator point mass on the unit square. State is (px, py, vx, vy),
// action is a 2-d acceleration. Per-step reward is the negative distance to
// the goal; entering the goal disc pays a terminal bonus and ends the episode.
class PointMass2D final : public Env {
  public:
    static constexpr double kDt = 0.1;
    static constexpr double kGoalRadius = 0.1;
    static constexpr double kGoalBonus = 100.0;

    PointMass2D(double start_radius = 0.0, int max_steps = 200, double start_x = kStartX, double start_y = kStartY)
        : start_radius_(start_radius), start_x_(start_x), start_y_(start_y) {
        spec_.state_dim = 4;
        spec_.action_dim = 2;
        spec_.action_low = {-1.0, -1.0};
        spec_.action_high = {1.0, 1.0};
        spec_.max_steps = max_steps;
    }

    const EnvSpec& spec() const override { return spec_; }
    const char* name() const override { return "pointmass"; }

    Vec reset(Rng& rng) override {
        state_ = {start_x_, start_y_, 0.0, 0.0};
        if (start_radius_ > 0.0) {
            // Uniform over a disc around the start point.
            const double ang = uniform(rng, 0.0, 2.0 * M_PI);
            const double rad = start_radius_ * std::sqrt(uniform(rng, 0.0, 1.0));
            state_[0] = clamp(start_x_ + rad * std::cos(ang), -1.0, 1.0);
            state_[1] = clamp(start_y_ + rad * std::sin(ang), -1.0, 1.0);
        }
        steps_ = 0;
        done_ = false;
        return state_;
    }

    StepResult step(const Vec& action, Rng&) override {
        if (done_) throw UsageError("PointMass2D: step() after the episode ended");
        const Vec a = clip_action(spec_, action);

        for (int d = 0; d < 2; ++d) {
            state_[static_cast<std::size_t>(2 + d)] =
                clamp(state_[static_cast<std::size_t>(2 + d)] + a[static_cast<std::size_t>(d)] * kDt, -1.0, 1.0);
            state_[static_cast<std::size_t>(d)] =
                clamp(state_[static_cast<std::size_t>(d)] + state_[static_cast<std::size_t>(2 + d)] * kDt, -1.0, 1.0);
        }
        steps_ += 1;

        StepResult r;
        r.next_state = state_;
        const double dx = state_[0] - kGoalX;
        const double dy = state_[1] - kGoalY;
        const double dist = std::sqrt(dx * dx + dy * dy);
        r.dense_reward = -dist;
        r.terminal = dist <= kGoalRadius ? 1 : 0;
        if (r.terminal) r.dense_reward += kGoalBonus;
        r.timeout = !r.terminal && steps_ >= spec_.max_steps;
        done_ = r.terminal || r.timeout;
        return r;
    }

    std::unique_ptr<Env> clone() const override { return std::make_unique<PointMass2D>(*this); }

    static constexpr double kStartX = -0.7;
    static constexpr double kStartY = -0.7;
    static constexpr double kGoalX = 0.7;
    static constexpr double kGoalY = 0.7;

  private:
    EnvSpec spec_;
    Vec state_{kStartX, kStartY, 0.0, 0.0};
    double start_radius_;
    double start_x_;
    double start_y_;
    int steps_ = 0;
    bool done_ = false;
};

}  // namespace sail
