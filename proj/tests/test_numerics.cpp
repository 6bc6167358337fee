#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "oracles.hpp"
#include "tinysiamese/numerics.hpp"
#include "tinysiamese/rng.hpp"

using namespace tinysiamese;

namespace {

LinearLayer random_layer(std::size_t out, std::size_t in, Rng& rng) {
    LinearLayer l(out, in);
    for (double& x : l.weight.data) x = rng.uniform(-1.0, 1.0);
    for (double& x : l.bias) x = rng.uniform(-1.0, 1.0);
    return l;
}

Vec random_vec(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Vec v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

}  // namespace

TEST_CASE("linear_forward identity and scalar cases") {
    LinearLayer id(2, 2);
    id.weight(0, 0) = 1.0;
    id.weight(1, 1) = 1.0;
    const Vec y = linear_forward(id, {3.0, -2.0});
    CHECK(y[0] == 3.0);
    CHECK(y[1] == -2.0);

    LinearLayer l(1, 2);
    l.weight(0, 0) = 2.0;
    l.weight(0, 1) = 1.0;
    l.bias[0] = 0.5;
    CHECK(linear_forward(l, {1.0, 1.0})[0] == doctest::Approx(3.5).epsilon(1e-15));
}

TEST_CASE("linear_forward matches the naive oracle") {
    Rng rng(11);
    for (int it = 0; it < 100; ++it) {
        const std::size_t out = 1 + rng.index(16);
        const std::size_t in = 1 + rng.index(16);
        const LinearLayer l = random_layer(out, in, rng);
        const Vec x = random_vec(in, rng);
        const Vec got = linear_forward(l, x);
        const Vec want = oracles::naive_linear_forward(l, x);
        for (std::size_t i = 0; i < out; ++i) CHECK(std::fabs(got[i] - want[i]) <= 1e-12);
    }
}

TEST_CASE("linear_forward is linear up to the bias") {
    Rng rng(12);
    for (int it = 0; it < 50; ++it) {
        const std::size_t out = 1 + rng.index(8);
        const std::size_t in = 1 + rng.index(8);
        const LinearLayer l = random_layer(out, in, rng);
        const Vec x = random_vec(in, rng);
        const Vec y = random_vec(in, rng);
        const double a = rng.uniform(-2.0, 2.0);
        const double b = rng.uniform(-2.0, 2.0);

        Vec combo(in);
        for (std::size_t j = 0; j < in; ++j) combo[j] = a * x[j] + b * y[j];
        const Vec lhs = linear_forward(l, combo);
        const Vec fx = linear_forward(l, x);
        const Vec fy = linear_forward(l, y);
        for (std::size_t i = 0; i < out; ++i) {
            const double rhs = a * fx[i] + b * fy[i] - (a + b - 1.0) * l.bias[i];
            CHECK(std::fabs(lhs[i] - rhs) <= 1e-10);
        }
    }
}

TEST_CASE("linear_forward rejects mismatched dims naming both") {
    const LinearLayer l(4, 3);
    try {
        linear_forward(l, {1.0, 2.0});
        FAIL("expected a dimension error");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find('2') != std::string::npos);
        CHECK(msg.find('3') != std::string::npos);
    }
}

TEST_CASE("linear_backward trivial cases") {
    Rng rng(13);
    const LinearLayer l = random_layer(3, 4, rng);
    const Vec x = random_vec(4, rng);

    const LinearGrads zero = linear_backward(l, x, {0.0, 0.0, 0.0});
    for (double g : zero.weight.data) CHECK(g == 0.0);
    for (double g : zero.bias) CHECK(g == 0.0);
    for (double g : zero.input) CHECK(g == 0.0);

    LinearLayer scalar(1, 1);
    scalar.weight(0, 0) = 2.0;
    const LinearGrads g = linear_backward(scalar, {3.0}, {1.0});
    CHECK(g.weight(0, 0) == 3.0);
    CHECK(g.bias[0] == 1.0);
    CHECK(g.input[0] == 2.0);
}

TEST_CASE("linear_backward matches finite differences of a scalar loss") {
    Rng rng(14);
    for (int it = 0; it < 100; ++it) {
        const std::size_t out = 1 + rng.index(16);
        const std::size_t in = 1 + rng.index(16);
        LinearLayer l = random_layer(out, in, rng);
        Vec x = random_vec(in, rng);
        const Vec c = random_vec(out, rng);  // loss = sum_i c_i * y_i

        const LinearGrads g = linear_backward(l, x, c);
        const auto loss = [&] {
            const Vec y = linear_forward(l, x);
            double total = 0.0;
            for (std::size_t i = 0; i < out; ++i) total += c[i] * y[i];
            return total;
        };

        for (std::size_t k = 0; k < l.weight.data.size(); ++k) {
            const double fd = oracles::central_diff(&l.weight.data[k], loss);
            CHECK(oracles::rel_err(g.weight.data[k], fd, 1e-3) <= 1e-6);
        }
        for (std::size_t i = 0; i < out; ++i) {
            const double fd = oracles::central_diff(&l.bias[i], loss);
            CHECK(oracles::rel_err(g.bias[i], fd, 1e-3) <= 1e-6);
        }
        for (std::size_t j = 0; j < in; ++j) {
            const double fd = oracles::central_diff(&x[j], loss);
            CHECK(oracles::rel_err(g.input[j], fd, 1e-3) <= 1e-6);
        }
    }
}

TEST_CASE("relu forward and backward") {
    const Vec y = relu({-1.0, 0.0, 2.0});
    CHECK(y == Vec{0.0, 0.0, 2.0});
    CHECK(relu_backward({-1.0, 0.0, 2.0}, {5.0, 5.0, 5.0}) == Vec{0.0, 0.0, 5.0});

    Rng rng(15);
    for (int it = 0; it < 100; ++it) {
        const std::size_t n = 1 + rng.index(16);
        Vec x = random_vec(n, rng);
        const Vec c = random_vec(n, rng);
        const Vec g = relu_backward(x, c);
        const auto loss = [&] {
            const Vec out = relu(x);
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) total += c[i] * out[i];
            return total;
        };
        for (std::size_t i = 0; i < n; ++i) {
            if (std::fabs(x[i]) < 1e-4) continue;  // kink
            const double fd = oracles::central_diff(&x[i], loss);
            CHECK(oracles::rel_err(g[i], fd, 1e-3) <= 1e-6);
        }
        for (double v : relu(x)) CHECK(v >= 0.0);
    }
}

TEST_CASE("sigmoid midpoint, symmetry and range") {
    CHECK(sigmoid({0.0})[0] == 0.5);

    Rng rng(16);
    for (int it = 0; it < 200; ++it) {
        const double x = rng.uniform(-1e3, 1e3);
        const double a = sigmoid_scalar(x);
        const double b = sigmoid_scalar(-x);
        CHECK(std::fabs(a + b - 1.0) <= 1e-12);
        CHECK(a > 0.0);
        CHECK(a < 1.0);
    }
    // extremes stay finite and inside (0, 1)
    CHECK(sigmoid_scalar(1e3) < 1.0);
    CHECK(sigmoid_scalar(-1e3) > 0.0);
}

TEST_CASE("sigmoid backward matches finite differences") {
    Rng rng(17);
    for (int it = 0; it < 100; ++it) {
        const std::size_t n = 1 + rng.index(16);
        Vec x = random_vec(n, rng, -4.0, 4.0);
        const Vec c = random_vec(n, rng);
        const Vec y = sigmoid(x);
        const Vec g = sigmoid_backward(y, c);
        const auto loss = [&] {
            const Vec out = sigmoid(x);
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) total += c[i] * out[i];
            return total;
        };
        for (std::size_t i = 0; i < n; ++i) {
            const double fd = oracles::central_diff(&x[i], loss);
            CHECK(oracles::rel_err(g[i], fd, 1e-3) <= 1e-6);
        }
    }
}
