#include <catch2/catch_amalgamated.hpp>

#include "sail/diagnostics.hpp"
#include "sail/discriminator.hpp"
#include "sail/gradcheck.hpp"

using namespace sail;

namespace {

std::vector<Vec> gaussian_cloud(const Vec& mean, double stddev, int n, Rng& rng) {
    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        Vec x(mean.size());
        for (std::size_t d = 0; d < x.size(); ++d) x[d] = mean[d] + gaussian(rng, 0.0, stddev);
        out.push_back(std::move(x));
    }
    return out;
}

// Teacher ~ N(+1, 0.25 I), self ~ N(-1, 0.25 I) in 2-d; train and return the
// discriminator. The optimal-D identity is a property of the plain
// classification objective, so these runs keep the stabilizing gradient
// penalty off.
Discriminator train_two_gaussian(Rng& rng, int steps, bool swap_classes = false) {
    auto disc = make_discriminator(2, {32, 32}, 1e-3, 0.0, rng);
    const Vec mean_t = {1.0, 1.0}, mean_b = {-1.0, -1.0};
    const int batch = 64;
    for (int k = 0; k < steps; ++k) {
        auto t = gaussian_cloud(mean_t, 0.5, batch, rng);
        auto b = gaussian_cloud(mean_b, 0.5, batch, rng);
        if (swap_classes)
            disc_update(disc, b, t, rng);
        else
            disc_update(disc, t, b, rng);
    }
    return disc;
}

}  // namespace

TEST_CASE("disc: indistinguishable classes settle near one half", "[discriminator]") {
    Rng rng(101);
    auto disc = make_discriminator(2, {32, 32}, 1e-3, 0.0, rng);
    const Vec mean = {0.2, -0.4};
    for (int k = 0; k < 300; ++k) {
        auto t = gaussian_cloud(mean, 0.5, 64, rng);
        auto b = gaussian_cloud(mean, 0.5, 64, rng);
        disc_update(disc, t, b, rng);
    }
    auto held_out = gaussian_cloud(mean, 0.5, 200, rng);
    double dev = 0.0;
    for (const auto& x : held_out) dev += std::fabs(disc_prob(disc, x) - 0.5) / held_out.size();
    INFO("mean |D - 0.5| = " << dev);
    REQUIRE(dev < 0.05);
}

TEST_CASE("disc: two-point dataset separates cleanly", "[discriminator]") {
    Rng rng(7);
    auto disc = make_discriminator(2, {32, 32}, 1e-3, 10.0, rng);
    const Vec p = {2.1, 2.1}, q = {-2.1, -2.1};
    std::vector<Vec> teacher(32, p), self(32, q);
    for (int k = 0; k < 600; ++k) disc_update(disc, teacher, self, rng);
    REQUIRE(disc_prob(disc, p) > 0.9);
    REQUIRE(disc_prob(disc, q) < 0.1);
}

TEST_CASE("disc: trained output matches the analytic density ratio", "[discriminator]") {
    Rng rng(13);
    auto disc = train_two_gaussian(rng, 1500);

    const Vec mean_t = {1.0, 1.0}, mean_b = {-1.0, -1.0};
    const Vec var = {0.25, 0.25};
    auto eval_t = gaussian_cloud(mean_t, 0.5, 500, rng);
    auto eval_b = gaussian_cloud(mean_b, 0.5, 500, rng);
    double mae = 0.0;
    for (const auto& x : eval_t)
        mae += std::fabs(disc_prob(disc, x) - gaussian_ratio_oracle(mean_t, var, mean_b, var, x));
    for (const auto& x : eval_b)
        mae += std::fabs(disc_prob(disc, x) - gaussian_ratio_oracle(mean_t, var, mean_b, var, x));
    mae /= 1000.0;
    INFO("mean absolute error vs analytic ratio " << mae);
    REQUIRE(mae < 0.05);

    // Shaped-reward ordering on the converged discriminator.
    REQUIRE(shaped_reward(disc, mean_t) > shaped_reward(disc, mean_b));
}

TEST_CASE("disc: shaped reward closed-form points", "[discriminator]") {
    Rng rng(1);
    auto disc = make_discriminator(2, {4}, 1e-3, 10.0, rng);
    // Zero the head: logit 0 regardless of input.
    auto& head = disc.net.layers.back();
    std::fill(head.w.data.begin(), head.w.data.end(), 0.0);
    std::fill(head.b.begin(), head.b.end(), 0.0);
    REQUIRE_THAT(shaped_reward(disc, {0.3, -2.0}), Catch::Matchers::WithinAbs(std::log(2.0), 1e-12));

    // Saturated-negative head: reward clamps at -log(1 - eps), stays positive.
    head.b[0] = -100.0;
    const double r = shaped_reward(disc, {0.0, 0.0});
    REQUIRE(r > 0.0);
    REQUIRE_THAT(r, Catch::Matchers::WithinAbs(1e-6, 1e-8));
}

TEST_CASE("disc: reward stays inside the clamp bounds for arbitrary nets", "[discriminator]") {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        auto disc = make_discriminator(3, {8}, 1e-3, 10.0, rng);
        for (auto& l : disc.net.layers)
            for (double& w : l.w.data) w = uniform(rng, -30.0, 30.0);
        const double lo = -std::log1p(-disc.clamp_eps);
        const double hi = -std::log(disc.clamp_eps);
        for (int k = 0; k < 20; ++k) {
            Vec x = {uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, -5, 5)};
            const double r = shaped_reward(disc, x);
            REQUIRE(std::isfinite(r));
            REQUIRE(r >= lo);
            REQUIRE(r <= hi + 1e-12);
        }
    }
}

TEST_CASE("disc: swapping classes flips the output", "[discriminator]") {
    Rng rng_a(31), rng_b(31);
    auto d1 = train_two_gaussian(rng_a, 800, false);
    auto d2 = train_two_gaussian(rng_b, 800, true);
    Rng eval_rng(99);
    auto pts_t = gaussian_cloud({1.0, 1.0}, 0.5, 100, eval_rng);
    auto pts_b = gaussian_cloud({-1.0, -1.0}, 0.5, 100, eval_rng);
    double dev = 0.0;
    for (const auto& x : pts_t) dev += std::fabs(disc_prob(d1, x) - (1.0 - disc_prob(d2, x))) / 200.0;
    for (const auto& x : pts_b) dev += std::fabs(disc_prob(d1, x) - (1.0 - disc_prob(d2, x))) / 200.0;
    INFO("mean |D - (1 - D_swapped)| = " << dev);
    REQUIRE(dev < 0.05);
}

TEST_CASE("disc: gradient-penalty parameter gradient passes finite differences", "[discriminator]") {
    Rng rng(47);
    auto disc = make_discriminator(3, {6, 5}, 1e-3, 10.0, rng);
    const Vec x_hat = {0.4, -0.2, 0.9};

    // Logit-head penalty, the path disc_update uses.
    MlpGrads analytic = MlpGrads::zeros_like(disc.net);
    accumulate_gradient_penalty(disc.net, x_hat, 1.0, analytic, /*at_preact=*/true);
    auto numeric = finite_diff_grad(
        [&](const MlpParams& p) {
            ForwardCache cache;
            mlp_forward(p, x_hat, &cache);
            const double gnorm = norm2(mlp_input_grad_preact(p, cache));
            return (gnorm - 1.0) * (gnorm - 1.0);
        },
        disc.net);
    REQUIRE(grad_rel_error(analytic, numeric) < 1e-4);

    // Output-gradient variant (exercises the second-derivative terms of the
    // sigmoid head).
    MlpGrads analytic_out = MlpGrads::zeros_like(disc.net);
    accumulate_gradient_penalty(disc.net, x_hat, 1.0, analytic_out);
    auto numeric_out = finite_diff_grad(
        [&](const MlpParams& p) {
            ForwardCache cache;
            mlp_forward(p, x_hat, &cache);
            const double gnorm = norm2(mlp_input_grad(p, cache));
            return (gnorm - 1.0) * (gnorm - 1.0);
        },
        disc.net);
    REQUIRE(grad_rel_error(analytic_out, numeric_out) < 1e-4);
}

TEST_CASE("disc: on-policy update is the same code path", "[discriminator]") {
    Rng rng_seed(5);
    auto d1 = make_discriminator(2, {8}, 1e-3, 10.0, rng_seed);
    auto d2 = d1;
    Rng r1(17), r2(17);
    Rng data_rng(3);
    auto t = gaussian_cloud({1.0, 0.0}, 0.3, 16, data_rng);
    auto b = gaussian_cloud({-1.0, 0.0}, 0.3, 16, data_rng);
    const double l1 = disc_update(d1, t, b, r1);
    const double l2 = onpolicy_disc_update(d2, t, b, r2);
    REQUIRE(l1 == l2);
    for (std::size_t l = 0; l < d1.net.layers.size(); ++l) REQUIRE(d1.net.layers[l].w.data == d2.net.layers[l].w.data);
}

TEST_CASE("disc: mismatched batches are configuration errors", "[discriminator]") {
    Rng rng(2);
    auto disc = make_discriminator(2, {4}, 1e-3, 10.0, rng);
    std::vector<Vec> a(4, Vec{0.0, 0.0}), b(3, Vec{0.0, 0.0});
    REQUIRE_THROWS_AS(disc_update(disc, a, b, rng), ConfigError);
    std::vector<Vec> wrong_dim(4, Vec{0.0, 0.0, 0.0});
    REQUIRE_THROWS_AS(disc_update(disc, wrong_dim, a, rng), ConfigError);
    REQUIRE_THROWS_AS(disc_update(disc, {}, {}, rng), ConfigError);
}
