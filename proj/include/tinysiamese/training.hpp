#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tinysiamese/data.hpp"
#include "tinysiamese/model.hpp"

namespace tinysiamese {

// Original Adam defaults; the optimizer choice comes from the training
// setup, the values are the standard published ones.
struct AdamParams {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First/second moment accumulators, one flat slot per parameter tensor
// (backbone weights/biases in layer order, then head weight, head bias).
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    long t = 0;
    AdamParams hyper;
};

AdamState make_adam_state(const TinyModel& model, const AdamParams& hyper = {});

// Bias-corrected update of a single tensor; t is the already-incremented
// step count. Exposed for direct testing against a reference Adam.
void adam_update(std::span<double> theta, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, long t, const AdamParams& hp);

// One optimizer step over every model parameter.
void adam_step(AdamState& state, TinyModel& model, const ParamGrads& grads);

struct BceResult {
    double loss = 0.0;
    std::vector<double> dloss_dp;  // includes the 1/N of the mean
};

// Mean binary cross-entropy over a batch. Probabilities are clamped to
// [1e-12, 1 - 1e-12] before the logs. Labels must be 0 or 1.
BceResult bce_loss(std::span<const double> p, std::span<const int> labels);

struct TrainConfig {
    int epochs = 120;     // stock verification setup: Adam, batch 18, 120 epochs
    int batch_size = 18;  // must be even; every batch is half similar, half dissimilar
    AdamParams adam;
    std::uint64_t seed = 0;
    std::size_t pairs_per_epoch = 0;  // 0 means one balanced batch per subject
    bool use_hadamard = kDefaultUseHadamard;
};

struct EpochStat {
    double mean_loss = 0.0;
    double seconds = 0.0;
};

using LossTrace = std::vector<EpochStat>;

struct BatchResult {
    double mean_loss = 0.0;
    ParamGrads grads;  // mean of per-pair gradients
};

// Forward/backward over one batch of pairs; this is exactly the gradient
// the training loop feeds to Adam.
BatchResult batch_gradient(const TinyModel& model, const Dataset& ds,
                           std::span<const Pair> batch, bool use_hadamard = kDefaultUseHadamard);

// Epoch-driven loop over balanced batches; mutates the model in place and
// returns the per-epoch loss trace. Deterministic given config.seed.
LossTrace train(TinyModel& model, const Dataset& dataset, const TrainConfig& config);

}  // namespace tinysiamese
