#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sail/diagnostics.hpp"

// Independent oracles for the test suite. These re-derive expected values
// from first principles and must not call into the implementation paths they
// check.
namespace oracles {

// Upper bound on PointMass2D returns: full-throttle straight-line run to the
// goal disc. Per-axis acceleration is maximal every step, which dominates any
// other policy both in per-step distance and in arrival time, so this value
// is the exact optimum of the discrete-time task.
inline double point_mass_optimal_return(double start_x = -0.7, double start_y = -0.7, double goal_x = 0.7,
                                        double goal_y = 0.7, double dt = 0.1, double bonus = 100.0,
                                        double goal_radius = 0.1, int horizon = 200) {
    double px = start_x, py = start_y, vx = 0.0, vy = 0.0, ret = 0.0;
    for (int t = 0; t < horizon; ++t) {
        const double ax = goal_x >= px ? 1.0 : -1.0;
        const double ay = goal_y >= py ? 1.0 : -1.0;
        vx = std::clamp(vx + ax * dt, -1.0, 1.0);
        vy = std::clamp(vy + ay * dt, -1.0, 1.0);
        px = std::clamp(px + vx * dt, -1.0, 1.0);
        py = std::clamp(py + vy * dt, -1.0, 1.0);
        const double dist = std::hypot(px - goal_x, py - goal_y);
        ret -= dist;
        if (dist <= goal_radius) {
            ret += bonus;
            break;
        }
    }
    return ret;
}

// Exact Q^pi for a tabular MDP by fixed-point iteration on
//   Q(s,a) = r(s,a) + gamma * sum_s' P(s'|s,a) (1 - terminal(s')) V(s'),
// the same bootstrap masking the TD critic uses.
inline std::vector<sail::Vec> q_eval_exact(const sail::TabularMdp& mdp, const sail::TabularPolicy& pi,
                                           const std::vector<sail::Vec>& reward) {
    std::vector<sail::Vec> q(static_cast<std::size_t>(mdp.n_states),
                             sail::Vec(static_cast<std::size_t>(mdp.n_actions), 0.0));
    for (int iter = 0; iter < 10000; ++iter) {
        double delta = 0.0;
        for (int s = 0; s < mdp.n_states; ++s) {
            for (int a = 0; a < mdp.n_actions; ++a) {
                double next = 0.0;
                for (int s2 = 0; s2 < mdp.n_states; ++s2) {
                    if (mdp.terminal[static_cast<std::size_t>(s2)]) continue;
                    double v = 0.0;
                    for (int a2 = 0; a2 < mdp.n_actions; ++a2)
                        v += pi[static_cast<std::size_t>(s2)][static_cast<std::size_t>(a2)] *
                             q[static_cast<std::size_t>(s2)][static_cast<std::size_t>(a2)];
                    next += mdp.p[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)][static_cast<std::size_t>(s2)] * v;
                }
                const double updated = reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] + mdp.gamma * next;
                delta = std::max(delta, std::fabs(updated - q[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]));
                q[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = updated;
            }
        }
        if (delta < 1e-12) break;
    }
    return q;
}

}  // namespace oracles
