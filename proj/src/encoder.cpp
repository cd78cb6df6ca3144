#include "pcp/encoder.hpp"

#include "pcp/binary_io.hpp"
#include "pcp/error.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <random>
#include <string>

namespace pcp {

namespace {

std::uint64_t next_version() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
}

constexpr char kMagic[4] = {'P', 'C', 'P', 'W'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
ForwardCache run_forward(const std::vector<DenseLayer>& layers, std::span<const T> x, std::uint64_t version) {
    if (x.size() != layers.front().in)
        throw Error(ErrorKind::DimensionMismatch, "encoder input has " + std::to_string(x.size()) +
                                                      " components, expected " + std::to_string(layers.front().in));
    ForwardCache cache;
    cache.version = version;
    cache.inputs.reserve(layers.size());
    cache.pre.reserve(layers.size());
    std::vector<double> a(x.begin(), x.end());
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& L = layers[l];
        std::vector<double> z(L.out);
        for (std::size_t o = 0; o < L.out; ++o) {
            const float* w = L.weight.data() + o * L.in;
            double s = L.bias[o];
            for (std::size_t i = 0; i < L.in; ++i) s += static_cast<double>(w[i]) * a[i];
            z[o] = s;
        }
        cache.inputs.push_back(std::move(a));
        const bool last = l + 1 == layers.size();
        a = z;
        if (!last)
            for (auto& v : a) v = v > 0.0 ? v : 0.0;
        cache.pre.push_back(std::move(z));
    }
    double sq = 0.0;
    for (double v : a) sq += v * v;
    if (!(sq > 0.0) || !std::isfinite(sq))
        throw Error(ErrorKind::NumericError, "encoder output is zero or non-finite; cannot normalize");
    cache.pre_norm = std::sqrt(sq);
    for (auto& v : a) v /= cache.pre_norm;
    cache.output = std::move(a);
    return cache;
}

} // namespace

void EncoderGrads::zero() {
    for (auto& l : layers) {
        std::fill(l.weight.begin(), l.weight.end(), 0.0);
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
    }
}

void EncoderGrads::scale(double factor) {
    for (auto& l : layers) {
        for (auto& w : l.weight) w *= factor;
        for (auto& b : l.bias) b *= factor;
    }
}

Encoder::Encoder(const EncoderSpec& spec, std::uint64_t seed) {
    if (spec.input_dim == 0 || spec.output_dim == 0) throw Error(ErrorKind::ConfigError, "encoder dims must be positive");
    std::vector<std::size_t> dims{spec.input_dim};
    for (auto h : spec.hidden_dims) {
        if (h == 0) throw Error(ErrorKind::ConfigError, "hidden layer width must be positive");
        dims.push_back(h);
    }
    dims.push_back(spec.output_dim);

    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        DenseLayer L;
        L.in = dims[l];
        L.out = dims[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(L.in));
        std::uniform_real_distribution<double> init(-bound, bound);
        L.weight.resize(L.in * L.out);
        L.bias.assign(L.out, 0.0f);
        for (auto& w : L.weight) w = static_cast<float>(init(rng));
        layers_.push_back(std::move(L));
    }
    version_ = next_version();
}

Encoder::Encoder(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw Error(ErrorKind::ConfigError, "encoder needs at least one layer");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& L = layers_[l];
        if (L.in == 0 || L.out == 0 || L.weight.size() != L.in * L.out || L.bias.size() != L.out)
            throw Error(ErrorKind::DimensionMismatch, "layer " + std::to_string(l) + " has inconsistent shapes");
        if (l > 0 && layers_[l - 1].out != L.in)
            throw Error(ErrorKind::DimensionMismatch, "layer " + std::to_string(l) + " input does not match previous output");
    }
    version_ = next_version();
}

std::size_t Encoder::parameter_count() const {
    std::size_t n = 0;
    for (const auto& L : layers_) n += L.weight.size() + L.bias.size();
    return n;
}

void Encoder::bump_version() { version_ = next_version(); }

std::vector<DenseLayer>& Encoder::mutable_layers() {
    bump_version();
    return layers_;
}

ForwardCache Encoder::forward(std::span<const double> x) const { return run_forward(layers_, x, version_); }
ForwardCache Encoder::forward(std::span<const float> x) const { return run_forward(layers_, x, version_); }

EncoderGrads Encoder::make_grads() const {
    EncoderGrads g;
    for (const auto& L : layers_) g.layers.push_back({std::vector<double>(L.weight.size(), 0.0), std::vector<double>(L.out, 0.0)});
    return g;
}

std::vector<double> Encoder::backward(const ForwardCache& cache, std::span<const double> grad_out,
                                      EncoderGrads& grads) const {
    if (cache.version != version_ || cache.pre.size() != layers_.size())
        throw Error(ErrorKind::CacheInvalid, "forward cache does not belong to the current parameters");
    if (grad_out.size() != output_dim()) throw Error(ErrorKind::DimensionMismatch, "grad_out has wrong dimension");
    if (grads.layers.size() != layers_.size()) throw Error(ErrorKind::DimensionMismatch, "gradient buffers do not match encoder");

    const auto& y = cache.output;
    double radial = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) radial += grad_out[k] * y[k];
    std::vector<double> g(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) g[k] = (grad_out[k] - radial * y[k]) / cache.pre_norm;

    for (std::size_t l = layers_.size(); l-- > 0;) {
        const auto& L = layers_[l];
        auto& G = grads.layers[l];
        const auto& a = cache.inputs[l];
        std::vector<double> down(L.in, 0.0);
        for (std::size_t o = 0; o < L.out; ++o) {
            const double go = g[o];
            G.bias[o] += go;
            if (go == 0.0) continue;
            const float* w = L.weight.data() + o * L.in;
            double* gw = G.weight.data() + o * L.in;
            for (std::size_t i = 0; i < L.in; ++i) {
                gw[i] += go * a[i];
                down[i] += go * w[i];
            }
        }
        if (l > 0) {
            const auto& z = cache.pre[l - 1];
            for (std::size_t i = 0; i < L.in; ++i)
                if (!(z[i] > 0.0)) down[i] = 0.0;
        }
        g = std::move(down);
    }
    return g;
}

void sgd_step(Encoder& encoder, const EncoderGrads& grads, OptimState& opt, double lr) {
    auto& layers = encoder.mutable_layers();
    if (grads.layers.size() != layers.size()) throw Error(ErrorKind::DimensionMismatch, "gradient layer count mismatch");
    if (opt.velocity.empty())
        for (const auto& L : layers)
            opt.velocity.push_back({std::vector<double>(L.weight.size(), 0.0), std::vector<double>(L.bias.size(), 0.0)});
    if (opt.velocity.size() != layers.size()) throw Error(ErrorKind::DimensionMismatch, "velocity layer count mismatch");

    auto update = [&](std::vector<float>& p, const std::vector<double>& g, std::vector<double>& v) {
        if (g.size() != p.size() || v.size() != p.size())
            throw Error(ErrorKind::DimensionMismatch, "gradient/velocity shape does not match parameter");
        for (std::size_t k = 0; k < p.size(); ++k) {
            v[k] = opt.momentum * v[k] + g[k] + opt.weight_decay * static_cast<double>(p[k]);
            p[k] = static_cast<float>(static_cast<double>(p[k]) - lr * v[k]);
        }
    };
    for (std::size_t l = 0; l < layers.size(); ++l) {
        update(layers[l].weight, grads.layers[l].weight, opt.velocity[l].weight);
        update(layers[l].bias, grads.layers[l].bias, opt.velocity[l].bias);
    }
}

double lr_at_epoch(double epoch, const LrSchedule& schedule) {
    double factor = 1.0;
    for (std::size_t k = 0; k < schedule.milestones.size() && k < schedule.factors.size(); ++k)
        if (epoch >= schedule.milestones[k]) factor = schedule.factors[k];
    return schedule.lr0 * factor;
}

void save_checkpoint(const Encoder& encoder, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
    out.write(kMagic, 4);
    binary::put<std::uint32_t>(out, kCheckpointVersion);
    binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(encoder.layers().size()));
    for (const auto& L : encoder.layers()) {
        binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(L.in));
        binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(L.out));
        for (float w : L.weight) binary::put<float>(out, w);
        for (float b : L.bias) binary::put<float>(out, b);
    }
    if (!out) throw Error(ErrorKind::IoError, "write failed: " + path.string());
}

Encoder load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    auto fail = [&](const std::string& what) -> Error {
        const auto pos = in ? static_cast<long long>(in.tellg()) : -1LL;
        return Error(ErrorKind::IngestError, path.string() + ": " + what + " (offset " + std::to_string(pos) + ")");
    };
    char magic[4];
    if (!in.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4))
        throw Error(ErrorKind::IngestError, path.string() + ": bad magic at offset 0 (expected PCPW)");
    std::uint32_t version = 0, count = 0;
    if (!binary::get(in, version) || !binary::get(in, count)) throw fail("truncated header");
    if (version != kCheckpointVersion) throw fail("unsupported checkpoint version " + std::to_string(version));
    if (count == 0) throw fail("checkpoint has no layers");
    std::vector<DenseLayer> layers(count);
    for (auto& L : layers) {
        std::uint32_t i = 0, o = 0;
        if (!binary::get(in, i) || !binary::get(in, o)) throw fail("truncated layer header");
        L.in = i;
        L.out = o;
        L.weight.resize(static_cast<std::size_t>(i) * o);
        L.bias.resize(o);
        for (auto& w : L.weight)
            if (!binary::get(in, w)) throw fail("truncated weights");
        for (auto& b : L.bias)
            if (!binary::get(in, b)) throw fail("truncated biases");
    }
    return Encoder(std::move(layers));
}

} // namespace pcp
