#pragma once

// Independent reference implementations and finite-difference machinery for
// the test suites. Nothing here calls back into the code paths it checks:
// the references are written as plain loops against the definitions.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "tinysiamese/model.hpp"
#include "tinysiamese/numerics.hpp"

namespace oracles {

// Relative error with an absolute floor: tiny true values are compared
// absolutely at guard * tol instead of blowing up the quotient.
inline double rel_err(double a, double b, double guard) {
    const double denom = std::max({std::fabs(a), std::fabs(b), guard});
    return std::fabs(a - b) / denom;
}

// Central finite difference of eval() with respect to *param.
template <typename F>
double central_diff(double* param, F eval, double h = 1e-6) {
    const double orig = *param;
    *param = orig + h;
    const double up = eval();
    *param = orig - h;
    const double down = eval();
    *param = orig;
    return (up - down) / (2.0 * h);
}

// Naive elementwise dot-product forward, written as explicit loops.
inline std::vector<double> naive_linear_forward(const tinysiamese::LinearLayer& layer,
                                                const std::vector<double>& x) {
    std::vector<double> y(layer.out_dim(), 0.0);
    for (std::size_t i = 0; i < layer.out_dim(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < layer.in_dim(); ++j) {
            acc += layer.weight(i, j) * x[j];
        }
        y[i] = acc + layer.bias[i];
    }
    return y;
}

// Elementwise [(a-b)^2, a*b], independent of the library routine.
inline std::vector<double> naive_distance_vector(const std::vector<double>& a,
                                                 const std::vector<double>& b) {
    std::vector<double> v;
    v.reserve(2 * a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v.push_back((a[i] - b[i]) * (a[i] - b[i]));
    for (std::size_t i = 0; i < a.size(); ++i) v.push_back(a[i] * b[i]);
    return v;
}

// Mean binary cross-entropy, accumulated term by term.
inline double naive_bce(const std::vector<double>& p, const std::vector<int>& y) {
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        total += -(y[i] * std::log(p[i]) + (1 - y[i]) * std::log(1.0 - p[i]));
    }
    return total / static_cast<double>(p.size());
}

// Textbook Adam on one scalar, kept separate from the library update.
struct ScalarAdam {
    double m = 0.0;
    double v = 0.0;
    long t = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    double step(double theta, double g) {
        t += 1;
        m = beta1 * m + (1.0 - beta1) * g;
        v = beta2 * v + (1.0 - beta2) * g * g;
        const double m_hat = m / (1.0 - std::pow(beta1, t));
        const double v_hat = v / (1.0 - std::pow(beta2, t));
        return theta - lr * m_hat / (std::sqrt(v_hat) + eps);
    }
};

// Pointers to every model parameter, in the same order the training code
// flattens them (backbone weight/bias per layer, then head weight/bias).
inline std::vector<double*> param_pointers(tinysiamese::TinyModel& model) {
    std::vector<double*> out;
    for (tinysiamese::LinearLayer& l : model.backbone) {
        for (double& x : l.weight.data) out.push_back(&x);
        for (double& x : l.bias) out.push_back(&x);
    }
    for (double& x : model.head.weight.data) out.push_back(&x);
    for (double& x : model.head.bias) out.push_back(&x);
    return out;
}

// The matching flattening of a gradient struct.
inline std::vector<double> flatten_grads(const tinysiamese::ParamGrads& g) {
    std::vector<double> out;
    for (const tinysiamese::LinearLayer& l : g.backbone) {
        out.insert(out.end(), l.weight.data.begin(), l.weight.data.end());
        out.insert(out.end(), l.bias.begin(), l.bias.end());
    }
    out.insert(out.end(), g.head.weight.data.begin(), g.head.weight.data.end());
    out.insert(out.end(), g.head.bias.begin(), g.head.bias.end());
    return out;
}

}  // namespace oracles
