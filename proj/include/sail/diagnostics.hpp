#pragma once

#include <limits>

#include "sail/chain_mdp.hpp"
#include "sail/common.hpp"

namespace sail {

// Small tabular MDP for exact computations. Absorbing states self-loop.
struct TabularMdp {
    int n_states = 0;
    int n_actions = 0;
    std::vector<std::vector<Vec>> p;  // p[s][a][s']
    Vec mu0;
    std::vector<bool> terminal;
    double gamma = 0.9;

    void validate() const {
        if (n_states < 1 || n_actions < 1) throw ConfigError("TabularMdp: empty state or action space");
        if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("TabularMdp: gamma must lie in (0,1)");
        double m0 = 0.0;
        for (double v : mu0) m0 += v;
        if (std::fabs(m0 - 1.0) > 1e-9) throw ConfigError("TabularMdp: mu0 must sum to 1");
        for (int s = 0; s < n_states; ++s)
            for (int a = 0; a < n_actions; ++a) {
                double row = 0.0;
                for (double v : p[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]) {
                    if (v < 0.0) throw ConfigError("TabularMdp: negative transition probability");
                    row += v;
                }
                if (std::fabs(row - 1.0) > 1e-9) throw ConfigError("TabularMdp: transition row does not sum to 1");
            }
    }
};

// Stochastic tabular policy pi[s][a].
using TabularPolicy = std::vector<Vec>;

inline void validate_policy(const TabularMdp& mdp, const TabularPolicy& pi) {
    if (static_cast<int>(pi.size()) != mdp.n_states) throw ConfigError("policy/state-count mismatch");
    for (const auto& row : pi) {
        if (static_cast<int>(row.size()) != mdp.n_actions) throw ConfigError("policy/action-count mismatch");
        double sum = 0.0;
        for (double v : row) {
            if (v < 0.0) throw ConfigError("policy has negative probabilities");
            sum += v;
        }
        if (std::fabs(sum - 1.0) > 1e-9) throw ConfigError("policy row does not sum to 1");
    }
}

struct OccupancyTable {
    int n_states = 0;
    int n_actions = 0;
    Vec d;

    OccupancyTable() = default;
    OccupancyTable(int s, int a) : n_states(s), n_actions(a), d(static_cast<std::size_t>(s) * a, 0.0) {}

    double& at(int s, int a) { return d[static_cast<std::size_t>(s) * n_actions + a]; }
    double at(int s, int a) const { return d[static_cast<std::size_t>(s) * n_actions + a]; }

    double sum() const {
        double t = 0.0;
        for (double v : d) t += v;
        return t;
    }
};

// Normalized discounted state-action occupancy by forward flow iteration.
// The visitation vector carries gamma^t * Pr(s_t = s); iteration stops once
// its sup-norm falls below 1e-10, then the accumulated measure is scaled by
// (1 - gamma).
inline OccupancyTable occupancy_exact(const TabularMdp& mdp, const TabularPolicy& pi) {
    mdp.validate();
    validate_policy(mdp, pi);

    OccupancyTable table(mdp.n_states, mdp.n_actions);
    Vec v = mdp.mu0;
    Vec next(static_cast<std::size_t>(mdp.n_states), 0.0);
    const int max_iters = 1 + static_cast<int>(std::log(1e-12) / std::log(mdp.gamma));
    for (int t = 0; t <= max_iters; ++t) {
        double sup = 0.0;
        for (double x : v) sup = std::max(sup, x);
        if (sup < 1e-10) break;

        for (int s = 0; s < mdp.n_states; ++s) {
            const double mass = v[static_cast<std::size_t>(s)];
            if (mass <= 0.0) continue;
            for (int a = 0; a < mdp.n_actions; ++a)
                table.at(s, a) += mass * pi[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
        }

        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < mdp.n_states; ++s) {
            const double mass = v[static_cast<std::size_t>(s)];
            if (mass <= 0.0) continue;
            for (int a = 0; a < mdp.n_actions; ++a) {
                const double pa = pi[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
                if (pa <= 0.0) continue;
                const Vec& row = mdp.p[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
                for (int s2 = 0; s2 < mdp.n_states; ++s2)
                    next[static_cast<std::size_t>(s2)] += mdp.gamma * mass * pa * row[static_cast<std::size_t>(s2)];
            }
        }
        std::swap(v, next);
    }
    for (double& x : table.d) x *= (1.0 - mdp.gamma);
    // Renormalize the truncation residue away so the table sums to 1 exactly.
    const double total = table.sum();
    for (double& x : table.d) x /= total;
    return table;
}

// Streaming gamma^t-weighted visit counter for sampled tabular trajectories.
struct OccupancyAccumulator {
    OccupancyAccumulator(int n_states, int n_actions) : table(n_states, n_actions) {}

    void add(const std::vector<std::pair<int, int>>& traj, double gamma) {
        double w = 1.0;
        for (const auto& [s, a] : traj) {
            table.at(s, a) += w;
            total += w;
            w *= gamma;
        }
    }

    OccupancyTable normalized() const {
        OccupancyTable out = table;
        if (total > 0.0)
            for (double& v : out.d) v /= total;
        return out;
    }

    OccupancyTable table;
    double total = 0.0;
};

inline OccupancyTable occupancy_empirical(const std::vector<std::vector<std::pair<int, int>>>& trajectories,
                                          double gamma, int n_states, int n_actions) {
    OccupancyAccumulator acc(n_states, n_actions);
    for (const auto& traj : trajectories) acc.add(traj, gamma);
    return acc.normalized();
}

// KL divergence between occupancy tables; +inf when q lacks support where p
// has mass, so exhaustive policy searches stay total.
inline double kl_tabular(const OccupancyTable& p, const OccupancyTable& q) {
    double kl = 0.0;
    for (std::size_t i = 0; i < p.d.size(); ++i) {
        if (p.d[i] <= 0.0) continue;
        if (q.d[i] <= 0.0) return std::numeric_limits<double>::infinity();
        kl += p.d[i] * std::log(p.d[i] / q.d[i]);
    }
    return kl;
}

inline double total_variation(const OccupancyTable& p, const OccupancyTable& q) {
    double tv = 0.0;
    for (std::size_t i = 0; i < p.d.size(); ++i) tv += std::fabs(p.d[i] - q.d[i]);
    return 0.5 * tv;
}

// Closed-form d_T / (d_T + d_B) for two diagonal Gaussians, evaluated through
// the log-density difference for numerical stability.
inline double gaussian_ratio_oracle(const Vec& mean_t, const Vec& var_t, const Vec& mean_b, const Vec& var_b,
                                    const Vec& x) {
    double log_ratio = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(var_t[i] > 0.0) || !(var_b[i] > 0.0)) throw ConfigError("gaussian_ratio_oracle: variances must be > 0");
        const double dt = x[i] - mean_t[i];
        const double db = x[i] - mean_b[i];
        log_ratio += -0.5 * dt * dt / var_t[i] - 0.5 * std::log(var_t[i]);
        log_ratio -= -0.5 * db * db / var_b[i] - 0.5 * std::log(var_b[i]);
    }
    return sigmoid(log_ratio);
}

// Tabular twin of the ChainMDP environment (same kernel constants), with the
// absorbing goal state self-looping.
inline TabularMdp make_chain_tabular(double gamma = 0.9) {
    TabularMdp mdp;
    mdp.n_states = ChainMDP::kStates;
    mdp.n_actions = 2;  // 0 = left, 1 = right
    mdp.gamma = gamma;
    mdp.mu0.assign(static_cast<std::size_t>(mdp.n_states), 0.0);
    mdp.mu0[0] = 1.0;
    mdp.terminal.assign(static_cast<std::size_t>(mdp.n_states), false);
    mdp.terminal[static_cast<std::size_t>(mdp.n_states - 1)] = true;

    mdp.p.assign(static_cast<std::size_t>(mdp.n_states),
                 std::vector<Vec>(2, Vec(static_cast<std::size_t>(mdp.n_states), 0.0)));
    for (int s = 0; s < mdp.n_states; ++s) {
        if (mdp.terminal[static_cast<std::size_t>(s)]) {
            mdp.p[static_cast<std::size_t>(s)][0][static_cast<std::size_t>(s)] = 1.0;
            mdp.p[static_cast<std::size_t>(s)][1][static_cast<std::size_t>(s)] = 1.0;
            continue;
        }
        const int left = std::max(s - 1, 0);
        const int right = std::min(s + 1, mdp.n_states - 1);
        mdp.p[static_cast<std::size_t>(s)][0][static_cast<std::size_t>(left)] += 1.0 - ChainMDP::kSlip;
        mdp.p[static_cast<std::size_t>(s)][0][static_cast<std::size_t>(s)] += ChainMDP::kSlip;
        mdp.p[static_cast<std::size_t>(s)][1][static_cast<std::size_t>(right)] += 1.0 - ChainMDP::kSlip;
        mdp.p[static_cast<std::size_t>(s)][1][static_cast<std::size_t>(s)] += ChainMDP::kSlip;
    }
    return mdp;
}

// Samples one trajectory of (s,a) indices, continuing through absorbing
// self-loops until gamma^t is negligible so absorbing occupancy is counted.
inline std::vector<std::pair<int, int>> simulate_tabular(const TabularMdp& mdp, const TabularPolicy& pi, Rng& rng,
                                                         double weight_floor = 1e-10) {
    const int horizon = 1 + static_cast<int>(std::log(weight_floor) / std::log(mdp.gamma));
    std::vector<std::pair<int, int>> traj;
    traj.reserve(static_cast<std::size_t>(horizon));

    auto draw = [&rng](const Vec& probs) {
        double u = uniform(rng, 0.0, 1.0);
        for (std::size_t k = 0; k < probs.size(); ++k) {
            u -= probs[k];
            if (u <= 0.0) return static_cast<int>(k);
        }
        return static_cast<int>(probs.size()) - 1;
    };

    int s = draw(mdp.mu0);
    for (int t = 0; t < horizon; ++t) {
        const int a = draw(pi[static_cast<std::size_t>(s)]);
        traj.emplace_back(s, a);
        s = draw(mdp.p[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]);
    }
    return traj;
}

}  // namespace sail
