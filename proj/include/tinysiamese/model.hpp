#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tinysiamese/numerics.hpp"

namespace tinysiamese {

// Build-time ablation switch: compiling with TINYSIAMESE_DISABLE_HADAMARD
// zeroes the Hadamard half of the distance vector by default, leaving only
// the elementwise squared differences.
#ifdef TINYSIAMESE_DISABLE_HADAMARD
inline constexpr bool kDefaultUseHadamard = false;
#else
inline constexpr bool kDefaultUseHadamard = true;
#endif

// The TinySiamese verification head. Two identical twins share one backbone
// that maps an n-dim feature vector to an n-dim embedding
// (n -> n/2 [-> n/2 ...] -> n, ReLU after every layer but the last, sigmoid
// last); a 1 x 2n head scores the distance vector of the two embeddings and
// a final sigmoid turns the score into a similarity probability.
struct TinyModel {
    std::size_t dim = 0;                // n, the input feature length
    std::vector<LinearLayer> backbone;  // at least 2 layers
    LinearLayer head;                   // 1 x 2n

    std::size_t parameter_count() const;
};

// Weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero,
// fully determined by seed. backbone_layers >= 2 extends the backbone with
// extra n/2 -> n/2 hidden layers; 2 is the stock architecture.
TinyModel init_model(std::size_t n, std::uint64_t seed, std::size_t backbone_layers = 2);

// Embedding of one feature vector: sigmoid(l2(relu(l1(x)))) for the stock
// two-layer backbone. Output length n, all entries in (0, 1).
Vec embed(const TinyModel& model, const Vec& x);

// V = [(e1 - e2)^2, e1 . e2]: first n entries the elementwise squared
// differences, last n entries the Hadamard product (zeros when disabled).
Vec distance_vector(const Vec& e1, const Vec& e2, bool use_hadamard = kDefaultUseHadamard);

// Per-twin forward cache.
struct TwinTrace {
    Vec input;
    std::vector<Vec> pre;   // pre-activations per backbone layer
    std::vector<Vec> post;  // activations per layer; post.back() is the embedding
};

// Everything backward_pair needs, recorded by score_pair.
struct PairActivations {
    TwinTrace left;
    TwinTrace right;
    Vec dvec;                   // 2n distance vector
    double head_pre = 0.0;      // head output before the final sigmoid
    double p = 0.0;             // similarity score in (0, 1)
    bool used_hadamard = true;
};

PairActivations score_pair(const TinyModel& model, const Vec& x1, const Vec& x2,
                           bool use_hadamard = kDefaultUseHadamard);

// Score only, no cache.
double score(const TinyModel& model, const Vec& x1, const Vec& x2,
             bool use_hadamard = kDefaultUseHadamard);

// Head + final sigmoid on two precomputed embeddings.
double score_from_embeddings(const TinyModel& model, const Vec& e1, const Vec& e2,
                             bool use_hadamard = kDefaultUseHadamard);

// Gradients with the same shapes as the parameters.
struct ParamGrads {
    std::vector<LinearLayer> backbone;
    LinearLayer head;
};

ParamGrads zero_grads(const TinyModel& model);
void accumulate(ParamGrads& into, const ParamGrads& g);
void scale(ParamGrads& g, double factor);

// Chain rule from dL/dp down to every parameter. Both twins' contributions
// are summed into the shared backbone gradients.
ParamGrads backward_pair(const TinyModel& model, const PairActivations& acts, double dL_dp);

// Checkpoint format "TSMD" v1: magic, version u16 LE, n u32 LE, then f64 LE
// arrays in fixed order (l1.weight row-major, l1.bias, l2.weight, l2.bias,
// head.weight, head.bias). Round trips are bit-exact. Only the stock
// two-layer backbone is representable.
void save_model(const TinyModel& model, const std::string& path);
TinyModel load_model(const std::string& path);

}  // namespace tinysiamese
