#pragma once

#include <cstddef>
#include <vector>

namespace tinysiamese {

using Vec = std::vector<double>;

// Dense row-major matrix of 64-bit reals.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::size_t size() const { return data.size(); }
};

// Fully-connected layer y = W x + b. The same struct doubles as a gradient
// holder, since parameter gradients share the parameter shapes.
struct LinearLayer {
    Mat weight;  // out_dim x in_dim
    Vec bias;    // out_dim

    LinearLayer() = default;
    LinearLayer(std::size_t out_dim, std::size_t in_dim)
        : weight(out_dim, in_dim), bias(out_dim, 0.0) {}

    std::size_t in_dim() const { return weight.cols; }
    std::size_t out_dim() const { return weight.rows; }
};

struct LinearGrads {
    Mat weight;  // dL/dW
    Vec bias;    // dL/db
    Vec input;   // dL/dx
};

Vec linear_forward(const LinearLayer& layer, const Vec& x);
LinearGrads linear_backward(const LinearLayer& layer, const Vec& x, const Vec& grad_out);

Vec relu(const Vec& x);
// Subgradient at exactly 0 is 0: grad passes only where x > 0.
Vec relu_backward(const Vec& x, const Vec& grad_out);

// Overflow-safe logistic function; output clamped into the open (0, 1).
double sigmoid_scalar(double x);
Vec sigmoid(const Vec& x);
// Backward from the cached forward output y (not the pre-activation).
Vec sigmoid_backward(const Vec& y, const Vec& grad_out);

}  // namespace tinysiamese
