#include "tinysiamese/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "binio.hpp"
#include "tinysiamese/errors.hpp"
#include "tinysiamese/rng.hpp"

namespace tinysiamese {

namespace {

constexpr char kMagic[4] = {'T', 'S', 'M', 'D'};
constexpr std::uint16_t kFormatVersion = 1;

void check_dim(const char* op, std::size_t got, std::size_t want) {
    if (got != want) {
        throw std::invalid_argument(std::string(op) + ": input length " + std::to_string(got) +
                                    " does not match model dim " + std::to_string(want));
    }
}

void fill_uniform(Mat& w, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols));
    for (double& x : w.data) x = rng.uniform(-bound, bound);
}

// Forward through the backbone, recording pre/post activations per layer.
TwinTrace run_backbone(const TinyModel& model, const Vec& x) {
    TwinTrace t;
    t.input = x;
    const std::size_t last = model.backbone.size() - 1;
    const Vec* cur = &t.input;
    for (std::size_t l = 0; l <= last; ++l) {
        t.pre.push_back(linear_forward(model.backbone[l], *cur));
        t.post.push_back(l == last ? sigmoid(t.pre.back()) : relu(t.pre.back()));
        cur = &t.post.back();
    }
    return t;
}

// Backward through one twin's backbone, accumulating into shared grads.
void backprop_twin(const TinyModel& model, const TwinTrace& t, const Vec& dL_dembed,
                   ParamGrads& grads) {
    const std::size_t last = model.backbone.size() - 1;
    // Final layer feeds the sigmoid; use the cached output for its slope.
    Vec dz = sigmoid_backward(t.post[last], dL_dembed);
    for (std::size_t l = last + 1; l-- > 0;) {
        const Vec& in = l == 0 ? t.input : t.post[l - 1];
        LinearGrads g = linear_backward(model.backbone[l], in, dz);
        for (std::size_t k = 0; k < g.weight.data.size(); ++k) {
            grads.backbone[l].weight.data[k] += g.weight.data[k];
        }
        for (std::size_t k = 0; k < g.bias.size(); ++k) grads.backbone[l].bias[k] += g.bias[k];
        if (l > 0) dz = relu_backward(t.pre[l - 1], g.input);
    }
}

}  // namespace

std::size_t TinyModel::parameter_count() const {
    std::size_t n = head.weight.size() + head.bias.size();
    for (const LinearLayer& l : backbone) n += l.weight.size() + l.bias.size();
    return n;
}

TinyModel init_model(std::size_t n, std::uint64_t seed, std::size_t backbone_layers) {
    if (n < 2 || n % 2 != 0) {
        throw std::invalid_argument("init_model: feature dim must be even and >= 2, got " +
                                    std::to_string(n));
    }
    if (backbone_layers < 2) {
        throw std::invalid_argument("init_model: backbone needs at least 2 layers, got " +
                                    std::to_string(backbone_layers));
    }
    const std::size_t half = n / 2;
    TinyModel m;
    m.dim = n;
    m.backbone.emplace_back(half, n);
    for (std::size_t l = 2; l < backbone_layers; ++l) m.backbone.emplace_back(half, half);
    m.backbone.emplace_back(n, half);
    m.head = LinearLayer(1, 2 * n);

    Rng rng(seed);
    for (LinearLayer& layer : m.backbone) fill_uniform(layer.weight, rng);
    fill_uniform(m.head.weight, rng);
    return m;
}

Vec embed(const TinyModel& model, const Vec& x) {
    check_dim("embed", x.size(), model.dim);
    return run_backbone(model, x).post.back();
}

Vec distance_vector(const Vec& e1, const Vec& e2, bool use_hadamard) {
    if (e1.size() != e2.size()) {
        throw std::invalid_argument("distance_vector: embedding lengths differ, " +
                                    std::to_string(e1.size()) + " vs " +
                                    std::to_string(e2.size()));
    }
    const std::size_t n = e1.size();
    Vec v(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = e1[i] - e2[i];
        v[i] = d * d;
        if (use_hadamard) v[n + i] = e1[i] * e2[i];
    }
    return v;
}

PairActivations score_pair(const TinyModel& model, const Vec& x1, const Vec& x2,
                           bool use_hadamard) {
    check_dim("score_pair", x1.size(), model.dim);
    check_dim("score_pair", x2.size(), model.dim);
    PairActivations acts;
    acts.left = run_backbone(model, x1);
    acts.right = run_backbone(model, x2);
    acts.dvec = distance_vector(acts.left.post.back(), acts.right.post.back(), use_hadamard);
    acts.head_pre = linear_forward(model.head, acts.dvec)[0];
    acts.p = sigmoid_scalar(acts.head_pre);
    acts.used_hadamard = use_hadamard;
    return acts;
}

double score(const TinyModel& model, const Vec& x1, const Vec& x2, bool use_hadamard) {
    return score_pair(model, x1, x2, use_hadamard).p;
}

double score_from_embeddings(const TinyModel& model, const Vec& e1, const Vec& e2,
                             bool use_hadamard) {
    const Vec v = distance_vector(e1, e2, use_hadamard);
    return sigmoid_scalar(linear_forward(model.head, v)[0]);
}

ParamGrads zero_grads(const TinyModel& model) {
    ParamGrads g;
    for (const LinearLayer& l : model.backbone) g.backbone.emplace_back(l.out_dim(), l.in_dim());
    g.head = LinearLayer(model.head.out_dim(), model.head.in_dim());
    return g;
}

void accumulate(ParamGrads& into, const ParamGrads& g) {
    for (std::size_t l = 0; l < into.backbone.size(); ++l) {
        for (std::size_t k = 0; k < into.backbone[l].weight.data.size(); ++k) {
            into.backbone[l].weight.data[k] += g.backbone[l].weight.data[k];
        }
        for (std::size_t k = 0; k < into.backbone[l].bias.size(); ++k) {
            into.backbone[l].bias[k] += g.backbone[l].bias[k];
        }
    }
    for (std::size_t k = 0; k < into.head.weight.data.size(); ++k) {
        into.head.weight.data[k] += g.head.weight.data[k];
    }
    into.head.bias[0] += g.head.bias[0];
}

void scale(ParamGrads& g, double factor) {
    for (LinearLayer& l : g.backbone) {
        for (double& x : l.weight.data) x *= factor;
        for (double& x : l.bias) x *= factor;
    }
    for (double& x : g.head.weight.data) x *= factor;
    g.head.bias[0] *= factor;
}

ParamGrads backward_pair(const TinyModel& model, const PairActivations& acts, double dL_dp) {
    const std::size_t n = model.dim;
    if (acts.dvec.size() != 2 * n || acts.left.post.size() != model.backbone.size() ||
        acts.right.post.size() != model.backbone.size() ||
        acts.left.post.back().size() != n || acts.right.post.back().size() != n) {
        throw std::invalid_argument("backward_pair: activation cache does not match model");
    }

    ParamGrads grads = zero_grads(model);

    // Head: p = sigmoid(w . dvec + b).
    const double dL_ds = dL_dp * acts.p * (1.0 - acts.p);
    grads.head.bias[0] = dL_ds;
    for (std::size_t j = 0; j < 2 * n; ++j) {
        grads.head.weight.data[j] = dL_ds * acts.dvec[j];
    }

    // Distance layer: dvec = [(e1-e2)^2, e1.e2].
    const Vec& e1 = acts.left.post.back();
    const Vec& e2 = acts.right.post.back();
    Vec dL_de1(n, 0.0);
    Vec dL_de2(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w_sq = dL_ds * model.head.weight.data[i];
        const double diff = e1[i] - e2[i];
        dL_de1[i] = w_sq * 2.0 * diff;
        dL_de2[i] = -w_sq * 2.0 * diff;
        if (acts.used_hadamard) {
            const double w_had = dL_ds * model.head.weight.data[n + i];
            dL_de1[i] += w_had * e2[i];
            dL_de2[i] += w_had * e1[i];
        }
    }

    backprop_twin(model, acts.left, dL_de1, grads);
    backprop_twin(model, acts.right, dL_de2, grads);
    return grads;
}

void save_model(const TinyModel& model, const std::string& path) {
    if (model.backbone.size() != 2) {
        throw DataError("checkpoint: format v1 stores the stock 2-layer backbone only, model has " +
                        std::to_string(model.backbone.size()) + " layers");
    }
    binio::Writer w;
    w.raw(reinterpret_cast<const unsigned char*>(kMagic), 4);
    w.u16(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(model.dim));
    for (const LinearLayer& l : model.backbone) {
        for (double x : l.weight.data) w.f64(x);
        for (double x : l.bias) w.f64(x);
    }
    for (double x : model.head.weight.data) w.f64(x);
    w.f64(model.head.bias[0]);
    binio::write_file(path, w.buffer(), "checkpoint");
}

TinyModel load_model(const std::string& path) {
    const auto buf = binio::read_file(path, "checkpoint");
    binio::Reader r(buf, "checkpoint");

    unsigned char magic[4];
    r.raw(magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw DataError("checkpoint: bad magic, not a TSMD file: '" + path + "'");
    }
    const std::uint16_t version = r.u16("version");
    if (version != kFormatVersion) {
        throw DataError("checkpoint: unsupported format version " + std::to_string(version));
    }
    const std::uint32_t n = r.u32("dim");
    if (n < 2 || n % 2 != 0) {
        throw DataError("checkpoint: dim mismatch, feature dim must be even and >= 2, got " +
                        std::to_string(n));
    }

    TinyModel m;
    m.dim = n;
    m.backbone.emplace_back(n / 2, n);
    m.backbone.emplace_back(n, n / 2);
    m.head = LinearLayer(1, 2 * n);
    for (LinearLayer& l : m.backbone) {
        for (double& x : l.weight.data) x = r.f64("backbone weight");
        for (double& x : l.bias) x = r.f64("backbone bias");
    }
    for (double& x : m.head.weight.data) x = r.f64("head weight");
    m.head.bias[0] = r.f64("head bias");
    r.expect_end();
    return m;
}

}  // namespace tinysiamese
