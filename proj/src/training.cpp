#include "tinysiamese/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tinysiamese {

namespace {

constexpr double kProbClamp = 1e-12;

std::vector<double*> parameter_tensors(TinyModel& model, std::vector<std::size_t>& sizes) {
    std::vector<double*> ptrs;
    sizes.clear();
    for (LinearLayer& l : model.backbone) {
        ptrs.push_back(l.weight.data.data());
        sizes.push_back(l.weight.data.size());
        ptrs.push_back(l.bias.data());
        sizes.push_back(l.bias.size());
    }
    ptrs.push_back(model.head.weight.data.data());
    sizes.push_back(model.head.weight.data.size());
    ptrs.push_back(model.head.bias.data());
    sizes.push_back(model.head.bias.size());
    return ptrs;
}

std::vector<const double*> gradient_tensors(const ParamGrads& grads) {
    std::vector<const double*> ptrs;
    for (const LinearLayer& l : grads.backbone) {
        ptrs.push_back(l.weight.data.data());
        ptrs.push_back(l.bias.data());
    }
    ptrs.push_back(grads.head.weight.data.data());
    ptrs.push_back(grads.head.bias.data());
    return ptrs;
}

std::vector<std::size_t> tensor_sizes(const TinyModel& model) {
    std::vector<std::size_t> sizes;
    for (const LinearLayer& l : model.backbone) {
        sizes.push_back(l.weight.data.size());
        sizes.push_back(l.bias.size());
    }
    sizes.push_back(model.head.weight.data.size());
    sizes.push_back(model.head.bias.size());
    return sizes;
}

}  // namespace

AdamState make_adam_state(const TinyModel& model, const AdamParams& hyper) {
    if (!(hyper.lr > 0.0) || !(hyper.eps > 0.0) || hyper.beta1 < 0.0 || hyper.beta1 >= 1.0 ||
        hyper.beta2 < 0.0 || hyper.beta2 >= 1.0) {
        throw std::invalid_argument("make_adam_state: hyperparameters out of range");
    }
    AdamState st;
    st.hyper = hyper;
    for (std::size_t s : tensor_sizes(model)) {
        st.m.emplace_back(s, 0.0);
        st.v.emplace_back(s, 0.0);
    }
    return st;
}

void adam_update(std::span<double> theta, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, long t, const AdamParams& hp) {
    if (theta.size() != grad.size() || theta.size() != m.size() || theta.size() != v.size()) {
        throw std::invalid_argument("adam_update: tensor shape mismatch");
    }
    const double corr1 = 1.0 - std::pow(hp.beta1, static_cast<double>(t));
    const double corr2 = 1.0 - std::pow(hp.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * grad[i];
        v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * grad[i] * grad[i];
        const double m_hat = m[i] / corr1;
        const double v_hat = v[i] / corr2;
        theta[i] -= hp.lr * m_hat / (std::sqrt(v_hat) + hp.eps);
    }
}

void adam_step(AdamState& state, TinyModel& model, const ParamGrads& grads) {
    std::vector<std::size_t> sizes;
    const std::vector<double*> params = parameter_tensors(model, sizes);
    const std::vector<const double*> gs = gradient_tensors(grads);
    if (params.size() != state.m.size() || params.size() != gs.size()) {
        throw std::invalid_argument("adam_step: state does not match model");
    }
    state.t += 1;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (state.m[i].size() != sizes[i]) {
            throw std::invalid_argument("adam_step: tensor " + std::to_string(i) +
                                        " shape mismatch");
        }
        adam_update({params[i], sizes[i]}, {gs[i], sizes[i]}, state.m[i], state.v[i], state.t,
                    state.hyper);
    }
}

BceResult bce_loss(std::span<const double> p, std::span<const int> labels) {
    if (p.empty()) throw std::invalid_argument("bce_loss: empty batch");
    if (p.size() != labels.size()) {
        throw std::invalid_argument("bce_loss: " + std::to_string(p.size()) + " scores vs " +
                                    std::to_string(labels.size()) + " labels");
    }
    const double n = static_cast<double>(p.size());
    BceResult r;
    r.dloss_dp.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw std::invalid_argument("bce_loss: label " + std::to_string(labels[i]) +
                                        " is not 0 or 1");
        }
        const double pi = std::clamp(p[i], kProbClamp, 1.0 - kProbClamp);
        const double y = static_cast<double>(labels[i]);
        r.loss += -(y * std::log(pi) + (1.0 - y) * std::log(1.0 - pi));
        r.dloss_dp[i] = (pi - y) / (pi * (1.0 - pi)) / n;
    }
    r.loss /= n;
    return r;
}

BatchResult batch_gradient(const TinyModel& model, const Dataset& ds,
                           std::span<const Pair> batch, bool use_hadamard) {
    if (batch.empty()) throw std::invalid_argument("batch_gradient: empty batch");

    std::vector<PairActivations> acts;
    acts.reserve(batch.size());
    std::vector<double> scores(batch.size());
    std::vector<int> labels(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        acts.push_back(score_pair(model, ds.records[batch[i].left].vector,
                                  ds.records[batch[i].right].vector, use_hadamard));
        scores[i] = acts.back().p;
        labels[i] = batch[i].label;
    }

    const BceResult bce = bce_loss(scores, labels);
    BatchResult out;
    out.mean_loss = bce.loss;
    out.grads = zero_grads(model);
    // dloss_dp already carries 1/N, so plain summation yields the mean.
    for (std::size_t i = 0; i < batch.size(); ++i) {
        accumulate(out.grads, backward_pair(model, acts[i], bce.dloss_dp[i]));
    }
    return out;
}

LossTrace train(TinyModel& model, const Dataset& dataset, const TrainConfig& config) {
    if (config.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (config.batch_size < 2 || config.batch_size % 2 != 0) {
        throw std::invalid_argument("train: batch_size must be even and >= 2, got " +
                                    std::to_string(config.batch_size));
    }
    if (dataset.dim != model.dim) {
        throw std::invalid_argument("train: dataset dim " + std::to_string(dataset.dim) +
                                    " does not match model dim " + std::to_string(model.dim));
    }

    // Default epoch: one balanced iteration per subject, so every epoch
    // anchors each user about once regardless of dataset size.
    const std::size_t batch = static_cast<std::size_t>(config.batch_size);
    const std::size_t pairs_per_epoch =
        config.pairs_per_epoch > 0 ? config.pairs_per_epoch : dataset.subjects.size() * batch;
    const std::size_t batches_per_epoch = (pairs_per_epoch + batch - 1) / batch;
    const std::size_t n_similar = batch / 2;

    Rng rng(config.seed);
    AdamState adam = make_adam_state(model, config.adam);

    LossTrace trace;
    trace.reserve(static_cast<std::size_t>(config.epochs));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        double loss_sum = 0.0;
        for (std::size_t b = 0; b < batches_per_epoch; ++b) {
            const std::vector<Pair> pairs = sample_balanced_batch(dataset, n_similar, rng);
            const BatchResult res = batch_gradient(model, dataset, pairs, config.use_hadamard);
            adam_step(adam, model, res.grads);
            loss_sum += res.mean_loss;
        }
        const auto t1 = std::chrono::steady_clock::now();
        EpochStat stat;
        stat.mean_loss = loss_sum / static_cast<double>(batches_per_epoch);
        stat.seconds = std::chrono::duration<double>(t1 - t0).count();
        trace.push_back(stat);
    }
    return trace;
}

}  // namespace tinysiamese
