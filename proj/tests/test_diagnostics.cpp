#include <catch2/catch_amalgamated.hpp>

#include "sail/diagnostics.hpp"

using namespace sail;

namespace {

TabularPolicy uniform_policy(int n_states, int n_actions) {
    return TabularPolicy(static_cast<std::size_t>(n_states), Vec(static_cast<std::size_t>(n_actions), 1.0 / n_actions));
}

TabularPolicy biased_right_policy(int n_states, double p_right) {
    return TabularPolicy(static_cast<std::size_t>(n_states), Vec{1.0 - p_right, p_right});
}

// Deterministic policy from a bitmask: bit s selects the action in state s.
TabularPolicy mask_policy(int n_states, unsigned mask) {
    TabularPolicy pi(static_cast<std::size_t>(n_states), Vec{0.0, 0.0});
    for (int s = 0; s < n_states; ++s) pi[static_cast<std::size_t>(s)][(mask >> s) & 1u] = 1.0;
    return pi;
}

double log_ratio_objective(const OccupancyTable& d_pi, const OccupancyTable& d_t, const OccupancyTable& d_b) {
    double v = 0.0;
    for (std::size_t i = 0; i < d_pi.d.size(); ++i) {
        if (d_pi.d[i] <= 0.0) continue;
        v += d_pi.d[i] * std::log(d_t.d[i] / d_b.d[i]);
    }
    return v;
}

}  // namespace

TEST_CASE("occupancy: single absorbing state holds all mass", "[diagnostics]") {
    TabularMdp mdp;
    mdp.n_states = 1;
    mdp.n_actions = 2;
    mdp.gamma = 0.9;
    mdp.mu0 = {1.0};
    mdp.terminal = {true};
    mdp.p = {{Vec{1.0}, Vec{1.0}}};

    TabularPolicy pi = {{1.0, 0.0}};  // always the first action
    auto d = occupancy_exact(mdp, pi);
    REQUIRE_THAT(d.at(0, 0), Catch::Matchers::WithinAbs(1.0, 1e-9));
    REQUIRE(d.at(0, 1) == 0.0);
}

TEST_CASE("occupancy: two-state cycle matches the geometric series", "[diagnostics]") {
    TabularMdp mdp;
    mdp.n_states = 2;
    mdp.n_actions = 2;
    mdp.gamma = 0.5;
    mdp.mu0 = {1.0, 0.0};
    mdp.terminal = {false, false};
    // Both actions hop to the other state.
    mdp.p = {{Vec{0.0, 1.0}, Vec{0.0, 1.0}}, {Vec{1.0, 0.0}, Vec{1.0, 0.0}}};

    auto d = occupancy_exact(mdp, uniform_policy(2, 2));
    // mu(state0) = sum over even t of gamma^t = 1/(1-g^2); d = (1-g) mu.
    const double d0 = (1.0 - 0.5) / (1.0 - 0.25);  // 2/3
    REQUIRE_THAT(d.at(0, 0), Catch::Matchers::WithinAbs(d0 / 2.0, 1e-9));
    REQUIRE_THAT(d.at(0, 1), Catch::Matchers::WithinAbs(d0 / 2.0, 1e-9));
    REQUIRE_THAT(d.at(1, 0), Catch::Matchers::WithinAbs((1.0 - d0) / 2.0, 1e-9));
    REQUIRE_THAT(d.at(1, 1), Catch::Matchers::WithinAbs((1.0 - d0) / 2.0, 1e-9));
}

TEST_CASE("occupancy: non-stochastic inputs are configuration errors", "[diagnostics]") {
    auto mdp = make_chain_tabular();
    auto pi = uniform_policy(mdp.n_states, mdp.n_actions);
    pi[3] = {0.7, 0.7};
    REQUIRE_THROWS_AS(occupancy_exact(mdp, pi), ConfigError);

    auto broken = make_chain_tabular();
    broken.p[2][1][0] += 0.5;
    REQUIRE_THROWS_AS(occupancy_exact(broken, uniform_policy(8, 2)), ConfigError);
}

TEST_CASE("occupancy: empirical one-step and gamma=0 cases", "[diagnostics]") {
    auto one = occupancy_empirical({{{2, 1}}}, 0.9, 4, 2);
    REQUIRE(one.at(2, 1) == 1.0);
    REQUIRE_THAT(one.sum(), Catch::Matchers::WithinAbs(1.0, 1e-12));

    auto g0 = occupancy_empirical({{{0, 0}, {1, 1}, {2, 0}}, {{3, 1}, {1, 0}}}, 0.0, 4, 2);
    REQUIRE_THAT(g0.at(0, 0), Catch::Matchers::WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(g0.at(3, 1), Catch::Matchers::WithinAbs(0.5, 1e-12));
    REQUIRE(g0.at(1, 1) == 0.0);
}

TEST_CASE("kl: identical distributions, closed form, and the support sentinel", "[diagnostics]") {
    OccupancyTable p(1, 2), q(1, 2);
    p.at(0, 0) = 1.0;
    q.at(0, 0) = 0.5;
    q.at(0, 1) = 0.5;
    REQUIRE(kl_tabular(p, p) == 0.0);
    REQUIRE_THAT(kl_tabular(p, q), Catch::Matchers::WithinAbs(std::log(2.0), 1e-12));

    OccupancyTable r(1, 2);
    r.at(0, 1) = 1.0;
    REQUIRE(std::isinf(kl_tabular(p, r)));
}

TEST_CASE("objective equivalence: log-ratio form equals the KL form on every deterministic policy", "[diagnostics]") {
    auto mdp = make_chain_tabular();
    auto d_t = occupancy_exact(mdp, biased_right_policy(mdp.n_states, 0.9));
    auto d_b = occupancy_exact(mdp, uniform_policy(mdp.n_states, mdp.n_actions));

    int argmax_ratio = -1, argmax_kl = -1;
    double best_ratio = -1e300, best_kl = -1e300;
    for (unsigned mask = 0; mask < (1u << mdp.n_states); ++mask) {
        auto d_pi = occupancy_exact(mdp, mask_policy(mdp.n_states, mask));
        const double a = log_ratio_objective(d_pi, d_t, d_b);
        const double b = -kl_tabular(d_pi, d_t) + kl_tabular(d_pi, d_b);
        REQUIRE_THAT(a, Catch::Matchers::WithinAbs(b, 1e-9));  // algebraic identity, any policy
        if (a > best_ratio) {
            best_ratio = a;
            argmax_ratio = static_cast<int>(mask);
        }
        if (b > best_kl) {
            best_kl = b;
            argmax_kl = static_cast<int>(mask);
        }
    }
    REQUIRE(argmax_ratio == argmax_kl);
}

TEST_CASE("gaussian ratio oracle: symmetry and limits", "[diagnostics]") {
    const Vec var = {0.25, 0.25};
    REQUIRE_THAT(gaussian_ratio_oracle({1.0, 1.0}, var, {-1.0, -1.0}, var, {0.0, 0.0}),
                 Catch::Matchers::WithinAbs(0.5, 1e-12));
    REQUIRE(gaussian_ratio_oracle({1.0, 1.0}, var, {-9.0, -9.0}, var, {1.0, 1.0}) > 0.999);
    REQUIRE_THROWS_AS(gaussian_ratio_oracle({0.0}, {0.0}, {1.0}, {1.0}, {0.5}), ConfigError);
}

TEST_CASE("occupancy: normalization invariant on random tabular policies", "[diagnostics]") {
    Rng rng(8);
    auto mdp = make_chain_tabular();
    for (int trial = 0; trial < 10; ++trial) {
        TabularPolicy pi(8, Vec(2, 0.0));
        for (auto& row : pi) {
            const double p = uniform(rng, 0.05, 0.95);
            row = {p, 1.0 - p};
        }
        auto d = occupancy_exact(mdp, pi);
        REQUIRE_THAT(d.sum(), Catch::Matchers::WithinAbs(1.0, 1e-9));
    }
}

TEST_CASE("occupancy: sampled estimate converges to the exact table over decades", "[diagnostics]") {
    auto mdp = make_chain_tabular();
    auto pi = biased_right_policy(mdp.n_states, 0.8);
    auto exact = occupancy_exact(mdp, pi);

    Rng rng(90210);
    std::vector<double> tvs;
    for (int rollouts : {1000, 10000, 100000}) {
        OccupancyAccumulator acc(mdp.n_states, mdp.n_actions);
        for (int k = 0; k < rollouts; ++k) acc.add(simulate_tabular(mdp, pi, rng), mdp.gamma);
        tvs.push_back(total_variation(acc.normalized(), exact));
    }
    INFO("TV over decades: " << tvs[0] << " " << tvs[1] << " " << tvs[2]);
    REQUIRE(tvs[1] < tvs[0]);
    REQUIRE(tvs[2] < tvs[1]);
    REQUIRE(tvs[2] < 1.5e-2);
}
