#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tensor.hpp"

namespace osradv {

// Five layer kinds are supported. Dense weights are (out, in); conv kernels
// are (out_ch, in_ch, kh, kw) over inputs laid out (channels, height, width).

struct DenseLayer {
    Tensor weights;  // (out, in)
    Tensor bias;     // (out)
};

struct Conv2dLayer {
    Tensor kernels;  // (out_ch, in_ch, kh, kw)
    Tensor bias;     // (out_ch)
    std::size_t stride = 1;
    std::size_t padding = 0;
};

struct ReluLayer {};

struct MaxPool2dLayer {
    std::size_t window = 2;
    std::size_t stride = 2;
};

struct FlattenLayer {};

using Layer = std::variant<DenseLayer, Conv2dLayer, ReluLayer, MaxPool2dLayer, FlattenLayer>;

const char* layer_kind_name(const Layer& layer);

// Gradients of a scalar objective w.r.t. one layer's parameters. Empty
// tensors for parameter-free layers.
struct LayerGrads {
    Tensor weights;
    Tensor bias;
};

// Immutable feed-forward network. Shape compatibility of consecutive layers
// is checked once at construction; forward/backward assume it afterwards.
class Network {
public:
    Network(std::vector<Layer> layers, std::vector<std::size_t> input_shape);

    const std::vector<Layer>& layers() const noexcept { return layers_; }
    const std::vector<std::size_t>& input_shape() const noexcept { return input_shape_; }
    std::size_t num_classes() const noexcept { return num_classes_; }

    // Throws unless x has exactly the network's input shape.
    void require_input(const Tensor& x) const { check_input(x); }

    // Logit vector of length num_classes(). Deterministic and pure.
    Tensor forward(const Tensor& x) const;

    // d(upstream . logits)/dx, exact reverse mode. upstream must have
    // length num_classes().
    Tensor input_gradient(const Tensor& x, const Tensor& upstream) const;

    // As input_gradient, and also accumulates parameter gradients into
    // param_grads (resized to one entry per layer). Used by the toy trainer.
    Tensor backward(const Tensor& x, const Tensor& upstream,
                    std::vector<LayerGrads>* param_grads) const;

private:
    void check_input(const Tensor& x) const;

    std::vector<Layer> layers_;
    std::vector<std::size_t> input_shape_;
    std::vector<std::vector<std::size_t>> layer_output_shapes_;
    std::size_t num_classes_ = 0;
};

namespace detail {

// Shape of a layer's output for the given input shape; throws Error naming
// layer_index on mismatch.
std::vector<std::size_t> layer_output_shape(const Layer& layer,
                                            const std::vector<std::size_t>& in_shape,
                                            std::size_t layer_index);

Tensor apply_layer(const Layer& layer, const Tensor& x);

// dx for one layer given its forward input and the gradient w.r.t. its
// output. grads, when non-null, receives the parameter gradients.
Tensor backprop_layer(const Layer& layer, const Tensor& x, const Tensor& dy,
                      LayerGrads* grads);

// Forward pass keeping every intermediate activation; trace[0] is x and
// trace.back() the logits.
std::vector<Tensor> forward_trace(const std::vector<Layer>& layers, const Tensor& x);

Tensor backward_from_trace(const std::vector<Layer>& layers,
                           const std::vector<Tensor>& trace, const Tensor& upstream,
                           std::vector<LayerGrads>* param_grads);

}  // namespace detail

// Numerically stable softmax (max-subtraction). Output sums to 1.
Tensor softmax(const Tensor& logits);

}  // namespace osradv
