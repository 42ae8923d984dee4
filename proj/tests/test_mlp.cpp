#include <doctest.h>

#include <cmath>
#include <vector>

#include "crossway/mlp.hpp"
#include "crossway/rng.hpp"

using namespace crossway;

namespace {

// Independent straight-line forward pass over the flat parameter layout.
std::vector<double> naive_forward(const MlpSpec& spec,
                                  const std::vector<double>& params,
                                  const std::vector<double>& input) {
    std::vector<double> a = input;
    size_t offset = 0;
    int in = spec.input_dim;
    for (int l = 0; l <= spec.hidden_layers; ++l) {
        const int out =
            l == spec.hidden_layers ? spec.output_dim : spec.hidden_units;
        std::vector<double> z(out, 0.0);
        for (int r = 0; r < out; ++r) {
            for (int c = 0; c < in; ++c) {
                z[r] += params[offset + static_cast<size_t>(r) * in + c] * a[c];
            }
        }
        offset += static_cast<size_t>(out) * in;
        for (int r = 0; r < out; ++r) z[r] += params[offset + r];
        offset += out;
        if (l < spec.hidden_layers) {
            for (double& v : z) v = std::tanh(v);
        }
        a = std::move(z);
        in = out;
    }
    return a;
}

}  // namespace

TEST_CASE("zero parameters give zero output") {
    const MlpSpec spec{5, 2, 8, 3};
    const Mlp net(spec);
    std::vector<double> params(net.param_count(), 0.0);
    Matrix input(1, 5);
    input << 1.0, -2.0, 0.5, 3.0, 7.0;
    const Matrix out = net.forward(params, input);
    for (int d = 0; d < 3; ++d) CHECK(out(0, d) == 0.0);
}

TEST_CASE("forward matches an independent reimplementation") {
    const MlpSpec spec{7, 3, 6, 2};
    const Mlp net(spec);
    Rng rng(9);
    std::vector<double> params(net.param_count());
    for (double& p : params) p = rng.uniform(-0.5, 0.5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(7);
        Matrix input(1, 7);
        for (int c = 0; c < 7; ++c) {
            x[c] = rng.uniform(-2.0, 2.0);
            input(0, c) = x[c];
        }
        const Matrix out = net.forward(params, input);
        const Matrix out2 = net.forward(params, input);
        const auto oracle = naive_forward(spec, params, x);
        for (int d = 0; d < 2; ++d) {
            CHECK(std::abs(out(0, d) - oracle[d]) < 1e-12);
            CHECK(out(0, d) == out2(0, d));  // determinism
        }
    }
}

TEST_CASE("orthogonal init yields orthogonal hidden weights") {
    const MlpSpec spec{129, 8, 64, 2};
    const Mlp net(spec);
    Rng rng(4);
    std::vector<double> params(net.param_count(), 0.0);
    net.init_params(params, rng, 0.01);
    // second hidden layer is 64x64: starts after (64*129 + 64)
    const size_t w1 = 64 * 129 + 64;
    Eigen::Map<const Matrix> w(params.data() + w1, 64, 64);
    const Eigen::MatrixXd gram = (w * w.transpose()) / 2.0;  // gain sqrt(2)
    CHECK((gram - Eigen::MatrixXd::Identity(64, 64)).norm() < 1e-9);
}

TEST_CASE("backward accumulates exact gradients (finite differences)") {
    const MlpSpec spec{4, 2, 5, 2};
    const Mlp net(spec);
    Rng rng(17);
    std::vector<double> params(net.param_count());
    for (double& p : params) p = rng.uniform(-0.7, 0.7);

    Matrix input(3, 4);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) input(r, c) = rng.uniform(-1.0, 1.0);
    }
    // scalar loss = sum of squared outputs
    const auto loss_of = [&](const std::vector<double>& p) {
        const Matrix out = net.forward(p, input);
        return out.array().square().sum();
    };

    Mlp::Cache cache;
    const Matrix out = net.forward(params, input, &cache);
    const Matrix grad_out = 2.0 * out;
    std::vector<double> grad(net.param_count(), 0.0);
    net.backward(params, cache, grad_out, grad);

    for (int trial = 0; trial < 50; ++trial) {
        const int i = rng.uniform_int(0, net.param_count() - 1);
        const double h = 1e-6;
        std::vector<double> p = params;
        p[i] += h;
        const double up = loss_of(p);
        p[i] -= 2 * h;
        const double down = loss_of(p);
        const double fd = (up - down) / (2 * h);
        CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("adam_step identities and oracle agreement") {
    SUBCASE("zero gradient leaves params unchanged") {
        std::vector<double> params = {1.0, -2.0};
        std::vector<double> grads = {0.0, 0.0};
        AdamState state(2);
        adam_step(params, grads, state, 0.1);
        CHECK(params[0] == 1.0);
        CHECK(params[1] == -2.0);
        CHECK(state.step_count == 1);
    }
    SUBCASE("first step moves by about -lr * sign(g)") {
        std::vector<double> params = {0.0, 0.0};
        std::vector<double> grads = {3.0, -0.5};
        AdamState state(2);
        adam_step(params, grads, state, 0.01);
        CHECK(params[0] == doctest::Approx(-0.01).epsilon(1e-6));
        CHECK(params[1] == doctest::Approx(0.01).epsilon(1e-6));
    }
    SUBCASE("10 steps match an independent reimplementation") {
        Rng rng(8);
        std::vector<double> params(6), oracle_params(6);
        for (int i = 0; i < 6; ++i) params[i] = oracle_params[i] = rng.uniform(-1, 1);
        AdamState state(6);
        std::vector<double> m(6, 0.0), v(6, 0.0);
        const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
        for (int t = 1; t <= 10; ++t) {
            std::vector<double> g(6);
            for (double& x : g) x = rng.uniform(-2, 2);
            adam_step(params, g, state, lr);
            for (int i = 0; i < 6; ++i) {
                m[i] = b1 * m[i] + (1 - b1) * g[i];
                v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
                const double mh = m[i] / (1 - std::pow(b1, t));
                const double vh = v[i] / (1 - std::pow(b2, t));
                oracle_params[i] -= lr * mh / (std::sqrt(vh) + eps);
            }
        }
        for (int i = 0; i < 6; ++i) {
            CHECK(std::abs(params[i] - oracle_params[i]) < 1e-12);
        }
    }
}
