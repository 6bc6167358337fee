#include "tinysiamese/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tinysiamese {

namespace {

void check_len(const char* op, const char* what, std::size_t got, std::size_t want) {
    if (got != want) {
        throw std::invalid_argument(std::string(op) + ": " + what + " has length " +
                                    std::to_string(got) + ", expected " +
                                    std::to_string(want));
    }
}

}  // namespace

Vec linear_forward(const LinearLayer& layer, const Vec& x) {
    check_len("linear_forward", "input", x.size(), layer.in_dim());
    const std::size_t out = layer.out_dim();
    const std::size_t in = layer.in_dim();
    Vec y(out);
    for (std::size_t i = 0; i < out; ++i) {
        double acc = layer.bias[i];
        const double* row = layer.weight.data.data() + i * in;
        for (std::size_t j = 0; j < in; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
    return y;
}

LinearGrads linear_backward(const LinearLayer& layer, const Vec& x, const Vec& grad_out) {
    check_len("linear_backward", "input", x.size(), layer.in_dim());
    check_len("linear_backward", "grad_out", grad_out.size(), layer.out_dim());
    const std::size_t out = layer.out_dim();
    const std::size_t in = layer.in_dim();
    LinearGrads g;
    g.weight = Mat(out, in);
    g.bias = grad_out;
    g.input.assign(in, 0.0);
    for (std::size_t i = 0; i < out; ++i) {
        const double go = grad_out[i];
        double* wrow = g.weight.data.data() + i * in;
        const double* row = layer.weight.data.data() + i * in;
        for (std::size_t j = 0; j < in; ++j) {
            wrow[j] = go * x[j];
            g.input[j] += row[j] * go;
        }
    }
    return g;
}

Vec relu(const Vec& x) {
    Vec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
    return y;
}

Vec relu_backward(const Vec& x, const Vec& grad_out) {
    check_len("relu_backward", "grad_out", grad_out.size(), x.size());
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] > 0.0 ? grad_out[i] : 0.0;
    return g;
}

double sigmoid_scalar(double x) {
    double y;
    if (x >= 0.0) {
        const double e = std::exp(-x);
        y = 1.0 / (1.0 + e);
    } else {
        const double e = std::exp(x);
        y = e / (1.0 + e);
    }
    // Keep the output strictly inside (0, 1) even when exp under/overflows.
    const double lo = std::numeric_limits<double>::min();
    const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    return std::clamp(y, lo, hi);
}

Vec sigmoid(const Vec& x) {
    Vec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid_scalar(x[i]);
    return y;
}

Vec sigmoid_backward(const Vec& y, const Vec& grad_out) {
    check_len("sigmoid_backward", "grad_out", grad_out.size(), y.size());
    Vec g(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) g[i] = grad_out[i] * y[i] * (1.0 - y[i]);
    return g;
}

}  // namespace tinysiamese
