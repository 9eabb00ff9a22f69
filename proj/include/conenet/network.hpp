#pragma once

// Dense feed-forward classifier: a chain of (W, b, g) layers followed by a
// softmax / categorical cross-entropy head. Samples are batch columns.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "conenet/activations.hpp"
#include "conenet/error.hpp"
#include "conenet/rng.hpp"
#include "conenet/tensor.hpp"

namespace conenet {

struct DenseLayer {
    Matrix weights;  // out_dim x in_dim
    Matrix bias;     // out_dim x 1
    Activation activation;

    [[nodiscard]] std::size_t in_dim() const noexcept { return weights.cols(); }
    [[nodiscard]] std::size_t out_dim() const noexcept { return weights.rows(); }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct InitOptions {
    /// Start cone-family layers at bias +1 so pre-activations sit on the cone peak instead of a zero.
    bool cone_bias_one = true;
};

class Network {
public:
    Network() = default;

    /// Validates the layer chain; throws DimensionError on a mismatch.
    explicit Network(std::vector<DenseLayer> layers) : layers_(std::move(layers)) { validate(); }

    /// Glorot-uniform weights in ±sqrt(6 / (fan_in + fan_out)), zero bias (or +1, see InitOptions).
    /// `widths` lists every layer size including input and output: {in, h1, ..., classes}.
    /// `hidden` applies to all hidden layers; the output layer is linear.
    static Network make(std::span<const std::size_t> widths, Activation hidden, Rng& rng,
                        InitOptions options = {}) {
        if (widths.size() < 2) throw ValidationError("a network needs at least input and output widths");
        std::vector<Activation> acts(widths.size() - 1, hidden);
        acts.back() = Activation(Kind::Identity);
        return make(widths, acts, rng, options);
    }

    static Network make(std::span<const std::size_t> widths, std::span<const Activation> activations, Rng& rng,
                        InitOptions options = {}) {
        if (widths.size() < 2 || activations.size() != widths.size() - 1) {
            throw ValidationError("need one activation per layer");
        }
        std::vector<DenseLayer> layers;
        for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
            const std::size_t fan_in = widths[l];
            const std::size_t fan_out = widths[l + 1];
            if (fan_in == 0 || fan_out == 0) throw ValidationError("layer widths must be positive");
            conenet::validate(activations[l]);
            const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            DenseLayer layer{Matrix(fan_out, fan_in), Matrix(fan_out, 1), activations[l]};
            for (double& w : layer.weights.data()) w = rng.uniform(-limit, limit);
            if (options.cone_bias_one && is_cone_family(activations[l].kind)) {
                for (double& b : layer.bias.data()) b = 1.0;
            }
            layers.push_back(std::move(layer));
        }
        return Network(std::move(layers));
    }

    [[nodiscard]] std::span<const DenseLayer> layers() const noexcept { return layers_; }
    [[nodiscard]] std::span<DenseLayer> layers() noexcept { return layers_; }
    [[nodiscard]] std::size_t input_dim() const { return layers_.front().in_dim(); }
    [[nodiscard]] std::size_t class_count() const { return layers_.back().out_dim(); }

    /// Number of parameter matrices (weights then bias, per layer).
    [[nodiscard]] std::size_t parameter_count() const noexcept { return 2 * layers_.size(); }

    Matrix& parameter(std::size_t index) {
        auto& layer = layers_[index / 2];
        return index % 2 == 0 ? layer.weights : layer.bias;
    }
    [[nodiscard]] const Matrix& parameter(std::size_t index) const {
        const auto& layer = layers_[index / 2];
        return index % 2 == 0 ? layer.weights : layer.bias;
    }

    friend bool operator==(const Network&, const Network&) = default;

private:
    void validate() const {
        if (layers_.empty()) throw ValidationError("network has no layers");
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const auto& layer = layers_[l];
            if (layer.weights.rows() == 0 || layer.weights.cols() == 0) {
                throw DimensionError("layer " + std::to_string(l) + " has an empty weight matrix");
            }
            if (layer.bias.rows() != layer.out_dim() || layer.bias.cols() != 1) {
                throw DimensionError("layer " + std::to_string(l) + " bias " + layer.bias.shape() +
                                     " does not match weights " + layer.weights.shape());
            }
            if (l > 0 && layers_[l - 1].out_dim() != layer.in_dim()) {
                throw DimensionError("layer " + std::to_string(l) + " input width " + std::to_string(layer.in_dim()) +
                                     " does not match previous output width " +
                                     std::to_string(layers_[l - 1].out_dim()));
            }
            conenet::validate(layer.activation);
        }
    }

    std::vector<DenseLayer> layers_;
};

struct ForwardTrace {
    std::vector<Matrix> pre_activations;  // z_k, one per layer
    std::vector<Matrix> activations;      // a_k = g_k(z_k); activations.back() are the logits
    Matrix probabilities;                 // classes x batch
};

/// Column-wise softmax with max subtraction.
inline Matrix softmax_columns(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (std::size_t j = 0; j < logits.cols(); ++j) {
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < logits.rows(); ++i) peak = std::max(peak, logits(i, j));
        double total = 0.0;
        for (std::size_t i = 0; i < logits.rows(); ++i) {
            out(i, j) = std::exp(logits(i, j) - peak);
            total += out(i, j);
        }
        for (std::size_t i = 0; i < logits.rows(); ++i) out(i, j) /= total;
    }
    return out;
}

inline ForwardTrace forward(const Network& net, const Matrix& batch) {
    if (batch.rows() != net.input_dim()) {
        throw DimensionError("batch has " + std::to_string(batch.rows()) + " features, network expects " +
                             std::to_string(net.input_dim()));
    }
    ForwardTrace trace;
    const Matrix* input = &batch;
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        const auto& layer = net.layers()[l];
        trace.pre_activations.push_back(add_broadcast_col(matmul(layer.weights, *input), layer.bias));
        if (!trace.pre_activations.back().all_finite()) throw NonFiniteLayerError("non-finite pre-activations", l);
        trace.activations.push_back(forward(layer.activation, trace.pre_activations.back()));
        if (!trace.activations.back().all_finite()) throw NonFiniteLayerError("non-finite activations", l);
        input = &trace.activations.back();
    }
    trace.probabilities = softmax_columns(trace.activations.back());
    return trace;
}

struct Gradients {
    /// Same indexing as Network::parameter().
    std::vector<Matrix> params;
};

struct LossAndGrads {
    double loss = 0.0;
    Gradients grads;
    ForwardTrace trace;
};

/// Mean categorical cross-entropy from logits, computed via log-sum-exp.
inline double cross_entropy(const Matrix& logits, std::span<const std::size_t> labels) {
    double total = 0.0;
    for (std::size_t j = 0; j < logits.cols(); ++j) {
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < logits.rows(); ++i) peak = std::max(peak, logits(i, j));
        double sum = 0.0;
        for (std::size_t i = 0; i < logits.rows(); ++i) sum += std::exp(logits(i, j) - peak);
        total += peak + std::log(sum) - logits(labels[j], j);
    }
    return total / static_cast<double>(logits.cols());
}

namespace detail {
inline std::vector<std::size_t> labels_from_onehot(const Matrix& onehot) {
    std::vector<std::size_t> labels(onehot.cols());
    for (std::size_t j = 0; j < onehot.cols(); ++j) {
        std::size_t ones = 0;
        for (std::size_t i = 0; i < onehot.rows(); ++i) {
            const double v = onehot(i, j);
            if (v == 1.0) {
                labels[j] = i;
                ++ones;
            } else if (v != 0.0) {
                throw ValidationError("label column " + std::to_string(j) + " is not one-hot");
            }
        }
        if (ones != 1) throw ValidationError("label column " + std::to_string(j) + " is not one-hot");
    }
    return labels;
}
}  // namespace detail

inline Matrix one_hot(std::span<const std::size_t> labels, std::size_t classes) {
    Matrix out(classes, labels.size());
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (labels[j] >= classes) throw ValidationError("label " + std::to_string(labels[j]) + " out of range");
        out(labels[j], j) = 1.0;
    }
    return out;
}

/// Reverse-mode gradients of the mean cross-entropy. At the logits the combined
/// softmax + cross-entropy gradient is (p - y) / batch_size.
inline LossAndGrads loss_and_grads(const Network& net, const Matrix& batch, const Matrix& onehot_labels) {
    if (onehot_labels.rows() != net.class_count() || onehot_labels.cols() != batch.cols()) {
        throw DimensionError("labels " + onehot_labels.shape() + " do not match " +
                             std::to_string(net.class_count()) + " classes x " + std::to_string(batch.cols()) +
                             " samples");
    }
    const auto labels = detail::labels_from_onehot(onehot_labels);

    LossAndGrads out;
    out.trace = forward(net, batch);
    out.loss = cross_entropy(out.trace.activations.back(), labels);

    const auto n = static_cast<double>(batch.cols());
    const auto layers = net.layers();
    out.grads.params.resize(net.parameter_count());

    // dL/da for the last layer's output.
    Matrix delta = out.trace.probabilities;
    for (std::size_t j = 0; j < delta.cols(); ++j) {
        delta(labels[j], j) -= 1.0;
        for (std::size_t i = 0; i < delta.rows(); ++i) delta(i, j) /= n;
    }

    for (std::size_t l = layers.size(); l-- > 0;) {
        // dL/dz = dL/da .* g'(z)
        const Matrix dz = hadamard(delta, derivative(layers[l].activation, out.trace.pre_activations[l]));
        const Matrix& input = l == 0 ? batch : out.trace.activations[l - 1];
        out.grads.params[2 * l] = matmul_transpose_b(dz, input);
        out.grads.params[2 * l + 1] = row_sums(dz);
        if (l > 0) delta = matmul_transpose_a(layers[l].weights, dz);
    }
    return out;
}

/// Argmax per column; ties go to the lowest index.
inline std::vector<std::size_t> argmax_columns(const Matrix& scores) {
    std::vector<std::size_t> out(scores.cols(), 0);
    for (std::size_t j = 0; j < scores.cols(); ++j) {
        for (std::size_t i = 1; i < scores.rows(); ++i) {
            if (scores(i, j) > scores(out[j], j)) out[j] = i;
        }
    }
    return out;
}

inline std::vector<std::size_t> predict_classes(const Network& net, const Matrix& batch) {
    return argmax_columns(forward(net, batch).probabilities);
}

// ---------------------------------------------------------------------------
// Model file
//
//   offset  type        field
//   0       char[4]     magic "CONE"
//   4       u32         format version (1)
//   8       u32         layer count
//   per layer:
//           u32         in_dim
//           u32         out_dim
//           u8          activation tag (see Kind)
//           f64         cone_beta
//           f64[out*in] weights, row-major
//           f64[out]    bias
//
// All integers and floats little-endian.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kModelFormatVersion = 1;

namespace detail {

class ByteWriter {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t u8() {
        need(1, "u8");
        return bytes_[pos_++];
    }
    std::uint32_t u32() {
        need(4, "u32");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    double f64() {
        need(8, "f64");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        return std::bit_cast<double>(bits);
    }
    [[nodiscard]] std::size_t pos() const noexcept { return pos_; }
    [[nodiscard]] std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n) throw FormatError(std::string("truncated model stream reading ") + what, pos_);
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> save(const Network& net) {
    detail::ByteWriter w;
    w.raw("CONE");
    w.u32(kModelFormatVersion);
    w.u32(static_cast<std::uint32_t>(net.layers().size()));
    for (const auto& layer : net.layers()) {
        w.u32(static_cast<std::uint32_t>(layer.in_dim()));
        w.u32(static_cast<std::uint32_t>(layer.out_dim()));
        w.u8(static_cast<std::uint8_t>(layer.activation.kind));
        w.f64(layer.activation.cone_beta);
        for (double v : layer.weights.data()) w.f64(v);
        for (double v : layer.bias.data()) w.f64(v);
    }
    return w.take();
}

inline Network load(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    const char magic[4] = {'C', 'O', 'N', 'E'};
    for (char c : magic) {
        const std::size_t at = r.pos();
        if (r.u8() != static_cast<std::uint8_t>(c)) throw FormatError("bad magic, expected \"CONE\"", at);
    }
    {
        const std::size_t at = r.pos();
        const auto version = r.u32();
        if (version != kModelFormatVersion) {
            throw FormatError("unsupported model format version " + std::to_string(version), at);
        }
    }
    const std::size_t count_at = r.pos();
    const auto count = r.u32();
    if (count == 0) throw FormatError("model has no layers", count_at);

    std::vector<DenseLayer> layers;
    for (std::uint32_t l = 0; l < count; ++l) {
        const std::size_t layer_at = r.pos();
        const auto in_dim = r.u32();
        const auto out_dim = r.u32();
        if (in_dim == 0 || out_dim == 0) throw FormatError("layer with zero width", layer_at);
        if (!layers.empty() && layers.back().out_dim() != in_dim) {
            throw FormatError("layer " + std::to_string(l) + " input width does not chain", layer_at);
        }
        const std::size_t tag_at = r.pos();
        const auto kind = kind_from_tag(r.u8());
        if (!kind) throw FormatError("invalid activation tag; valid tags are 0.." + std::to_string(kKindCount - 1) +
                                         " (" + valid_kind_names() + ")",
                                     tag_at);
        const std::size_t beta_at = r.pos();
        const double beta = r.f64();
        if (!(beta > 0.0) || !std::isfinite(beta)) throw FormatError("cone_beta must be positive", beta_at);

        const std::uint64_t values = static_cast<std::uint64_t>(in_dim) * out_dim + out_dim;
        if (values > r.remaining() / 8) throw FormatError("truncated layer parameters", r.pos());
        DenseLayer layer{Matrix(out_dim, in_dim), Matrix(out_dim, 1), Activation(*kind, beta)};
        for (double& v : layer.weights.data()) v = r.f64();
        for (double& v : layer.bias.data()) v = r.f64();
        if (!layer.weights.all_finite() || !layer.bias.all_finite()) {
            throw FormatError("layer " + std::to_string(l) + " has non-finite parameters", layer_at);
        }
        layers.push_back(std::move(layer));
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes after last layer", r.pos());
    return Network(std::move(layers));
}

}  // namespace conenet
