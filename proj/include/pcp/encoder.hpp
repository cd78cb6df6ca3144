#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pcp {

struct EncoderSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims{64, 64};
    std::size_t output_dim = 128;
};

// out x in weights, row-major, plus bias.
struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<float> weight;
    std::vector<float> bias;

    bool operator==(const DenseLayer&) const = default;
};

// Activations recorded by a forward pass, consumed by backward.
struct ForwardCache {
    std::uint64_t version = 0;
    std::vector<std::vector<double>> inputs;  // input of every layer
    std::vector<std::vector<double>> pre;     // affine output of every layer
    std::vector<double> output;               // unit-norm embedding
    double pre_norm = 0.0;                    // |z| of the last affine output
};

struct LayerGrad {
    std::vector<double> weight;
    std::vector<double> bias;
};

struct EncoderGrads {
    std::vector<LayerGrad> layers;
    void zero();
    void scale(double factor);
};

/// ReLU multilayer perceptron followed by projection onto the unit sphere.
class Encoder {
public:
    /// Weights U(-sqrt(6/in), sqrt(6/in)), zero biases.
    Encoder(const EncoderSpec& spec, std::uint64_t seed);
    explicit Encoder(std::vector<DenseLayer> layers);

    std::size_t input_dim() const { return layers_.front().in; }
    std::size_t output_dim() const { return layers_.back().out; }
    std::size_t parameter_count() const;

    const std::vector<DenseLayer>& layers() const { return layers_; }
    /// Mutable access invalidates outstanding caches.
    std::vector<DenseLayer>& mutable_layers();

    ForwardCache forward(std::span<const double> x) const;
    ForwardCache forward(std::span<const float> x) const;
    std::vector<double> embed(std::span<const float> x) const { return forward(x).output; }

    /// Accumulates parameter gradients of a scalar loss into `grads` given
    /// dL/d(output); returns dL/d(input). Normalization backward projects onto
    /// the tangent space: (g - <g,y> y) / |z|.
    std::vector<double> backward(const ForwardCache& cache, std::span<const double> grad_out,
                                 EncoderGrads& grads) const;

    EncoderGrads make_grads() const;

    bool operator==(const Encoder& other) const { return layers_ == other.layers_; }

private:
    void bump_version();

    std::vector<DenseLayer> layers_;
    std::uint64_t version_ = 0;
};

struct OptimState {
    double lr0 = 0.03;
    double momentum = 0.9;
    double weight_decay = 0.0005;
    std::vector<LayerGrad> velocity;
};

/// v := momentum * v + grad + weight_decay * param; param := param - lr * v.
void sgd_step(Encoder& encoder, const EncoderGrads& grads, OptimState& opt, double lr);

struct LrSchedule {
    double lr0 = 0.03;
    std::vector<double> milestones{120, 160};
    std::vector<double> factors{0.1, 0.01};  // multiply lr0 from each milestone on
};

double lr_at_epoch(double epoch, const LrSchedule& schedule = {});

// "PCPW" checkpoint: magic, u32 version, u32 layer count, then per layer
// u32 in, u32 out, out*in f32 weights (row-major), out f32 biases. All little-endian.
void save_checkpoint(const Encoder& encoder, const std::filesystem::path& path);
Encoder load_checkpoint(const std::filesystem::path& path);

} // namespace pcp
