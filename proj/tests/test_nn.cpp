#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "sail/adam.hpp"
#include "sail/gradcheck.hpp"
#include "sail/nn.hpp"

using namespace sail;

namespace {

// Straight-line reimplementation of the forward pass, kept deliberately
// independent of mlp_forward (plain nested loops over explicit indices).
Vec naive_forward(const MlpParams& p, const Vec& input) {
    Vec cur = input;
    for (const auto& layer : p.layers) {
        Vec next(layer.w.rows, 0.0);
        for (int o = 0; o < layer.w.rows; ++o) {
            double s = layer.b[static_cast<std::size_t>(o)];
            for (int i = 0; i < layer.w.cols; ++i) s += layer.w.at(o, i) * cur[static_cast<std::size_t>(i)];
            switch (layer.act) {
                case Act::relu: next[static_cast<std::size_t>(o)] = s > 0 ? s : 0; break;
                case Act::tanh: next[static_cast<std::size_t>(o)] = std::tanh(s); break;
                case Act::sigmoid: next[static_cast<std::size_t>(o)] = 1.0 / (1.0 + std::exp(-s)); break;
                case Act::identity: next[static_cast<std::size_t>(o)] = s; break;
            }
        }
        cur = next;
    }
    return cur;
}

MlpParams single_layer(const Matrix& w, const Vec& b, Act act) {
    MlpParams p;
    p.layers.push_back({w, b, act});
    return p;
}

}  // namespace

TEST_CASE("forward: identity layer is the identity map", "[nn]") {
    Matrix w(2, 2);
    w.at(0, 0) = 1.0;
    w.at(1, 1) = 1.0;
    auto p = single_layer(w, {0.0, 0.0}, Act::identity);
    Vec y = mlp_forward(p, {3.0, -1.0});
    REQUIRE(y[0] == 3.0);
    REQUIRE(y[1] == -1.0);
}

TEST_CASE("forward: zero-weight sigmoid unit outputs 0.5", "[nn]") {
    Matrix w(1, 1);
    auto p = single_layer(w, {0.0}, Act::sigmoid);
    REQUIRE(mlp_forward(p, {123.0})[0] == 0.5);
    REQUIRE(mlp_forward(p, {-7.5})[0] == 0.5);
}

TEST_CASE("forward: random 4-8-2 net matches straight-line oracle", "[nn]") {
    Rng rng(42);
    auto p = make_mlp(4, {8}, 2, Act::relu, Act::tanh, rng);
    Vec x = {0.3, -1.2, 0.75, 2.0};
    Vec got = mlp_forward(p, x);
    Vec want = naive_forward(p, x);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) REQUIRE_THAT(got[i], Catch::Matchers::WithinAbs(want[i], 1e-14));
}

TEST_CASE("forward: dimension mismatch is a configuration error", "[nn]") {
    Rng rng(1);
    auto p = make_mlp(4, {8}, 2, Act::relu, Act::tanh, rng);
    REQUIRE_THROWS_AS(mlp_forward(p, {1.0, 2.0}), ConfigError);
}

TEST_CASE("forward: non-finite input is rejected at the boundary", "[nn]") {
    Rng rng(1);
    auto p = make_mlp(2, {4}, 1, Act::tanh, Act::identity, rng);
    REQUIRE_THROWS_AS(mlp_forward(p, {1.0, std::numeric_limits<double>::quiet_NaN()}), NumericError);
    REQUIRE_THROWS_AS(mlp_forward(p, {std::numeric_limits<double>::infinity(), 0.0}), NumericError);
}

TEST_CASE("backward: single linear unit product rule", "[nn]") {
    Matrix w(1, 1);
    w.at(0, 0) = 1.7;
    auto p = single_layer(w, {0.4}, Act::identity);
    ForwardCache cache;
    mlp_forward(p, {2.0}, &cache);
    auto [grads, dx] = mlp_backward(p, cache, {1.0});
    REQUIRE(grads.w[0].at(0, 0) == 2.0);  // dw = x
    REQUIRE(grads.b[0][0] == 1.0);        // db = 1
    REQUIRE(dx[0] == 1.7);                // dx = w
}

TEST_CASE("backward: zero upstream gradient yields zero gradients", "[nn]") {
    Rng rng(7);
    auto p = make_mlp(3, {6, 5}, 2, Act::tanh, Act::identity, rng);
    ForwardCache cache;
    mlp_forward(p, {0.1, -0.2, 0.9}, &cache);
    auto [grads, dx] = mlp_backward(p, cache, {0.0, 0.0});
    for (const auto& m : grads.w)
        for (double v : m.data) REQUIRE(v == 0.0);
    for (const auto& b : grads.b)
        for (double v : b) REQUIRE(v == 0.0);
    for (double v : dx) REQUIRE(v == 0.0);
}

TEST_CASE("backward: random 3-5-1 net matches central finite differences", "[nn]") {
    Rng rng(11);
    auto p = make_mlp(3, {5}, 1, Act::tanh, Act::identity, rng);
    Vec x = {0.4, -0.9, 1.3};
    ForwardCache cache;
    mlp_forward(p, x, &cache);
    auto [analytic, dx] = mlp_backward(p, cache, {1.0});
    auto numeric = finite_diff_grad([&](const MlpParams& q) { return mlp_forward(q, x)[0]; }, p);
    REQUIRE(grad_rel_error(analytic, numeric) < 1e-4);
}

TEST_CASE("backward: mismatched cache is an internal error", "[nn]") {
    Rng rng(3);
    auto p = make_mlp(3, {5}, 1, Act::tanh, Act::identity, rng);
    auto other = make_mlp(3, {4, 4}, 1, Act::tanh, Act::identity, rng);
    ForwardCache cache;
    mlp_forward(other, {0.1, 0.2, 0.3}, &cache);
    MlpGrads g = MlpGrads::zeros_like(p);
    REQUIRE_THROWS_AS(mlp_backward_batch(p, cache, Matrix::from_row({1.0}), g), InternalError);
}

TEST_CASE("gradient-check property over 50 random networks", "[nn]") {
    Rng rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int in = 1 + static_cast<int>(rng() % 6);
        const int out = 1 + static_cast<int>(rng() % 3);
        const int depth = 1 + static_cast<int>(rng() % 3);
        std::vector<int> hidden;
        for (int d = 0; d + 1 < depth; ++d) hidden.push_back(2 + static_cast<int>(rng() % 15));
        const Act hidden_acts[] = {Act::relu, Act::tanh, Act::sigmoid};
        const Act out_acts[] = {Act::identity, Act::tanh, Act::sigmoid};
        auto p = make_mlp(in, hidden, out, hidden_acts[rng() % 3], out_acts[rng() % 3], rng);

        Vec x(static_cast<std::size_t>(in));
        for (double& v : x) v = uniform(rng, -1.5, 1.5);
        Vec upstream(static_cast<std::size_t>(out));
        for (double& v : upstream) v = uniform(rng, -1.0, 1.0);

        ForwardCache cache;
        mlp_forward(p, x, &cache);
        auto [analytic, dx] = mlp_backward(p, cache, upstream);
        auto numeric = finite_diff_grad(
            [&](const MlpParams& q) { return dot(mlp_forward(q, x), upstream); }, p);
        worst = std::max(worst, grad_rel_error(analytic, numeric));
    }
    INFO("worst relative error " << worst);
    REQUIRE(worst < 1e-4);
}

TEST_CASE("batched backward equals summed per-sample gradients", "[nn]") {
    Rng rng(5);
    auto p = make_mlp(3, {6}, 2, Act::tanh, Act::identity, rng);
    Matrix x(4, 3);
    Matrix dy(4, 2);
    for (double& v : x.data) v = uniform(rng, -1, 1);
    for (double& v : dy.data) v = uniform(rng, -1, 1);

    ForwardCache cache;
    mlp_forward_batch(p, x, &cache);
    MlpGrads batched = MlpGrads::zeros_like(p);
    mlp_backward_batch(p, cache, dy, batched);

    MlpGrads summed = MlpGrads::zeros_like(p);
    for (int n = 0; n < x.rows; ++n) {
        ForwardCache c1;
        mlp_forward(p, x.row_vec(n), &c1);
        auto [g, dx] = mlp_backward(p, c1, dy.row_vec(n));
        for (std::size_t l = 0; l < g.w.size(); ++l) {
            for (std::size_t i = 0; i < g.w[l].data.size(); ++i) summed.w[l].data[i] += g.w[l].data[i];
            for (std::size_t i = 0; i < g.b[l].size(); ++i) summed.b[l][i] += g.b[l][i];
        }
    }
    REQUIRE(grad_rel_error(batched, summed) < 1e-12);
}

TEST_CASE("determinism: same seed gives bit-identical nets and outputs", "[nn]") {
    Rng rng1(99), rng2(99);
    auto p1 = make_mlp(4, {8, 8}, 2, Act::relu, Act::tanh, rng1);
    auto p2 = make_mlp(4, {8, 8}, 2, Act::relu, Act::tanh, rng2);
    for (std::size_t l = 0; l < p1.layers.size(); ++l) {
        REQUIRE(p1.layers[l].w.data == p2.layers[l].w.data);
        REQUIRE(p1.layers[l].b == p2.layers[l].b);
    }
    Vec x = {0.5, -0.25, 0.125, 2.0};
    REQUIRE(mlp_forward(p1, x) == mlp_forward(p2, x));
}

TEST_CASE("adam: zero gradient leaves parameters unchanged and decays moments", "[nn]") {
    Rng rng(12);
    auto p = make_mlp(2, {3}, 1, Act::tanh, Act::identity, rng);
    auto before = p;
    auto s = OptState::for_params(p, 1e-3);
    // Seed nonzero moments, then push zero gradients through.
    MlpGrads g1 = MlpGrads::zeros_like(p);
    g1.w[0].at(0, 0) = 1.0;
    adam_step(s, p, g1);
    const double m_after_one = s.m_w[0].at(0, 0);
    MlpGrads zero = MlpGrads::zeros_like(p);
    auto p_snapshot = p;
    for (int k = 0; k < 5; ++k) adam_step(s, p, zero);
    REQUIRE(std::fabs(s.m_w[0].at(0, 0)) < std::fabs(m_after_one));
    // Zero gradient in all slots that never saw a gradient: untouched.
    REQUIRE(p.layers[0].b == p_snapshot.layers[0].b);
    REQUIRE(before.layers[0].b == p_snapshot.layers[0].b);
}

TEST_CASE("adam: first step moves a scalar parameter by about -lr", "[nn]") {
    Matrix w(1, 1);
    auto p = single_layer(w, {0.0}, Act::identity);  // scalar param w = 0
    auto s = OptState::for_params(p, 1e-3);
    MlpGrads g = MlpGrads::zeros_like(p);
    g.w[0].at(0, 0) = 1.0;
    adam_step(s, p, g);
    REQUIRE(s.step == 1);
    REQUIRE_THAT(p.layers[0].w.at(0, 0), Catch::Matchers::WithinAbs(-1e-3, 1e-6));
}

TEST_CASE("adam: descends x^2 monotonically after warm-up", "[nn]") {
    Matrix w(1, 1);
    w.at(0, 0) = 1.0;
    auto p = single_layer(w, {0.0}, Act::identity);
    auto s = OptState::for_params(p, 1e-2);
    double prev = 1.0;
    for (int k = 0; k < 100; ++k) {
        MlpGrads g = MlpGrads::zeros_like(p);
        g.w[0].at(0, 0) = 2.0 * p.layers[0].w.at(0, 0);  // d/dx x^2
        adam_step(s, p, g);
        const double x = std::fabs(p.layers[0].w.at(0, 0));
        if (k >= 5) REQUIRE(x <= prev + 1e-12);
        prev = x;
    }
    REQUIRE(prev < 0.5);
}

TEST_CASE("adam: non-finite gradient aborts", "[nn]") {
    Matrix w(1, 1);
    auto p = single_layer(w, {0.0}, Act::identity);
    auto s = OptState::for_params(p, 1e-3);
    MlpGrads g = MlpGrads::zeros_like(p);
    g.w[0].at(0, 0) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(adam_step(s, p, g), NumericError);
}

TEST_CASE("finite_diff_grad: quadratic and constant functions", "[nn]") {
    Matrix w(1, 1);
    w.at(0, 0) = 3.0;
    auto p = single_layer(w, {0.0}, Act::identity);
    auto g = finite_diff_grad([](const MlpParams& q) { return q.layers[0].w.at(0, 0) * q.layers[0].w.at(0, 0); }, p,
                              1e-5);
    REQUIRE_THAT(g.w[0].at(0, 0), Catch::Matchers::WithinAbs(6.0, 1e-6));

    auto gc = finite_diff_grad([](const MlpParams&) { return 4.25; }, p, 1e-5);
    REQUIRE(gc.w[0].at(0, 0) == 0.0);
    REQUIRE(gc.b[0][0] == 0.0);
}

TEST_CASE("finite_diff_grad: rejects non-positive eps", "[nn]") {
    Matrix w(1, 1);
    auto p = single_layer(w, {0.0}, Act::identity);
    REQUIRE_THROWS_AS(finite_diff_grad([](const MlpParams&) { return 0.0; }, p, 0.0), ConfigError);
}

TEST_CASE("checkpoint round-trips bit-exactly", "[nn]") {
    Rng rng(31337);
    auto p = make_mlp(5, {7, 6}, 3, Act::relu, Act::tanh, rng, 1e-2);
    std::stringstream ss;
    write_mlp(ss, p);
    auto q = read_mlp(ss);
    REQUIRE(q.layers.size() == p.layers.size());
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        REQUIRE(q.layers[l].act == p.layers[l].act);
        REQUIRE(q.layers[l].w.rows == p.layers[l].w.rows);
        REQUIRE(q.layers[l].w.data == p.layers[l].w.data);
        REQUIRE(q.layers[l].b == p.layers[l].b);
    }
}

TEST_CASE("checkpoint: corrupt stream is an io error", "[nn]") {
    std::stringstream ss("mlp-checkpoint v1\nlayers 1\nlayer 2 2 relu\n0x1p+0 nonsense");
    REQUIRE_THROWS_AS(read_mlp(ss), IoError);
}
