#include "network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace osradv {

const char* layer_kind_name(const Layer& layer) {
    switch (layer.index()) {
        case 0: return "dense";
        case 1: return "conv2d";
        case 2: return "relu";
        case 3: return "maxpool2d";
        case 4: return "flatten";
    }
    return "?";
}

namespace {

[[noreturn]] void layer_fail(std::size_t index, const Layer& layer, const std::string& msg) {
    fail_invalid("layer " + std::to_string(index) + " (" + layer_kind_name(layer) +
                 "): " + msg);
}

std::size_t conv_out_dim(std::size_t in, std::size_t k, std::size_t stride,
                         std::size_t padding) {
    const std::size_t padded = in + 2 * padding;
    if (padded < k) return 0;
    return (padded - k) / stride + 1;
}

}  // namespace

namespace detail {

std::vector<std::size_t> layer_output_shape(const Layer& layer,
                                            const std::vector<std::size_t>& in_shape,
                                            std::size_t layer_index) {
    if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
        if (dense->weights.rank() != 2)
            layer_fail(layer_index, layer, "weights must have shape (out, in)");
        const std::size_t out = dense->weights.shape()[0];
        const std::size_t in = dense->weights.shape()[1];
        if (dense->bias.rank() != 1 || dense->bias.shape()[0] != out)
            layer_fail(layer_index, layer, "bias length must equal weight rows");
        if (in_shape.size() != 1 || in_shape[0] != in)
            layer_fail(layer_index, layer,
                       "expects a length-" + std::to_string(in) + " vector, got input shape " +
                           Tensor(in_shape).shape_string());
        return {out};
    }
    if (const auto* conv = std::get_if<Conv2dLayer>(&layer)) {
        if (conv->kernels.rank() != 4)
            layer_fail(layer_index, layer, "kernels must have shape (out_ch, in_ch, kh, kw)");
        const auto& ks = conv->kernels.shape();
        const std::size_t out_ch = ks[0], in_ch = ks[1], kh = ks[2], kw = ks[3];
        if (conv->bias.rank() != 1 || conv->bias.shape()[0] != out_ch)
            layer_fail(layer_index, layer, "bias length must equal out_ch");
        if (conv->stride < 1) layer_fail(layer_index, layer, "stride must be >= 1");
        if (in_shape.size() != 3)
            layer_fail(layer_index, layer, "expects a (channels, height, width) input");
        if (in_shape[0] != in_ch)
            layer_fail(layer_index, layer,
                       "expects " + std::to_string(in_ch) + " input channels, got " +
                           std::to_string(in_shape[0]));
        const std::size_t oh = conv_out_dim(in_shape[1], kh, conv->stride, conv->padding);
        const std::size_t ow = conv_out_dim(in_shape[2], kw, conv->stride, conv->padding);
        if (oh == 0 || ow == 0)
            layer_fail(layer_index, layer, "kernel larger than padded input");
        return {out_ch, oh, ow};
    }
    if (std::holds_alternative<ReluLayer>(layer)) {
        return in_shape;
    }
    if (const auto* pool = std::get_if<MaxPool2dLayer>(&layer)) {
        if (pool->window < 1 || pool->stride < 1)
            layer_fail(layer_index, layer, "window and stride must be >= 1");
        if (in_shape.size() != 3)
            layer_fail(layer_index, layer, "expects a (channels, height, width) input");
        if (in_shape[1] < pool->window || in_shape[2] < pool->window)
            layer_fail(layer_index, layer, "window larger than input");
        const std::size_t oh = (in_shape[1] - pool->window) / pool->stride + 1;
        const std::size_t ow = (in_shape[2] - pool->window) / pool->stride + 1;
        return {in_shape[0], oh, ow};
    }
    // flatten
    std::size_t n = 1;
    for (std::size_t d : in_shape) n *= d;
    return {n};
}

Tensor apply_layer(const Layer& layer, const Tensor& x) {
    if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
        const std::size_t out = dense->weights.shape()[0];
        const std::size_t in = dense->weights.shape()[1];
        Tensor y({out});
        for (std::size_t o = 0; o < out; ++o) {
            double acc = dense->bias[o];
            const double* row = dense->weights.data() + o * in;
            for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
            y[o] = acc;
        }
        return y;
    }
    if (const auto* conv = std::get_if<Conv2dLayer>(&layer)) {
        const auto& ks = conv->kernels.shape();
        const std::size_t out_ch = ks[0], in_ch = ks[1], kh = ks[2], kw = ks[3];
        const std::size_t h = x.shape()[1], w = x.shape()[2];
        const std::size_t oh = conv_out_dim(h, kh, conv->stride, conv->padding);
        const std::size_t ow = conv_out_dim(w, kw, conv->stride, conv->padding);
        Tensor y({out_ch, oh, ow});
        const long pad = static_cast<long>(conv->padding);
        for (std::size_t oc = 0; oc < out_ch; ++oc) {
            for (std::size_t oy = 0; oy < oh; ++oy) {
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    double acc = conv->bias[oc];
                    for (std::size_t ic = 0; ic < in_ch; ++ic) {
                        for (std::size_t ky = 0; ky < kh; ++ky) {
                            const long iy = static_cast<long>(oy * conv->stride + ky) - pad;
                            if (iy < 0 || iy >= static_cast<long>(h)) continue;
                            for (std::size_t kx = 0; kx < kw; ++kx) {
                                const long ix = static_cast<long>(ox * conv->stride + kx) - pad;
                                if (ix < 0 || ix >= static_cast<long>(w)) continue;
                                acc += x[(ic * h + iy) * w + ix] *
                                       conv->kernels[((oc * in_ch + ic) * kh + ky) * kw + kx];
                            }
                        }
                    }
                    y[(oc * oh + oy) * ow + ox] = acc;
                }
            }
        }
        return y;
    }
    if (std::holds_alternative<ReluLayer>(layer)) {
        Tensor y = x;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = y[i] > 0.0 ? y[i] : 0.0;
        return y;
    }
    if (const auto* pool = std::get_if<MaxPool2dLayer>(&layer)) {
        const std::size_t ch = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
        const std::size_t oh = (h - pool->window) / pool->stride + 1;
        const std::size_t ow = (w - pool->window) / pool->stride + 1;
        Tensor y({ch, oh, ow});
        for (std::size_t c = 0; c < ch; ++c) {
            for (std::size_t oy = 0; oy < oh; ++oy) {
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    // First (row-major) maximal element wins; keeps the
                    // backward routing deterministic under ties.
                    double best = -std::numeric_limits<double>::infinity();
                    for (std::size_t py = 0; py < pool->window; ++py) {
                        for (std::size_t px = 0; px < pool->window; ++px) {
                            const std::size_t iy = oy * pool->stride + py;
                            const std::size_t ix = ox * pool->stride + px;
                            const double v = x[(c * h + iy) * w + ix];
                            if (v > best) best = v;
                        }
                    }
                    y[(c * oh + oy) * ow + ox] = best;
                }
            }
        }
        return y;
    }
    // flatten
    Tensor y = x;
    return Tensor({x.size()}, std::move(y.values()));
}

Tensor backprop_layer(const Layer& layer, const Tensor& x, const Tensor& dy,
                      LayerGrads* grads) {
    if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
        const std::size_t out = dense->weights.shape()[0];
        const std::size_t in = dense->weights.shape()[1];
        Tensor dx({in});
        for (std::size_t o = 0; o < out; ++o) {
            const double* row = dense->weights.data() + o * in;
            const double g = dy[o];
            for (std::size_t i = 0; i < in; ++i) dx[i] += row[i] * g;
        }
        if (grads) {
            grads->weights = Tensor(dense->weights.shape());
            grads->bias = Tensor(dense->bias.shape());
            for (std::size_t o = 0; o < out; ++o) {
                const double g = dy[o];
                double* wrow = grads->weights.data() + o * in;
                for (std::size_t i = 0; i < in; ++i) wrow[i] = g * x[i];
                grads->bias[o] = g;
            }
        }
        return dx;
    }
    if (const auto* conv = std::get_if<Conv2dLayer>(&layer)) {
        const auto& ks = conv->kernels.shape();
        const std::size_t out_ch = ks[0], in_ch = ks[1], kh = ks[2], kw = ks[3];
        const std::size_t h = x.shape()[1], w = x.shape()[2];
        const std::size_t oh = dy.shape()[1], ow = dy.shape()[2];
        const long pad = static_cast<long>(conv->padding);
        Tensor dx(x.shape());
        if (grads) {
            grads->weights = Tensor(conv->kernels.shape());
            grads->bias = Tensor(conv->bias.shape());
        }
        for (std::size_t oc = 0; oc < out_ch; ++oc) {
            for (std::size_t oy = 0; oy < oh; ++oy) {
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    const double g = dy[(oc * oh + oy) * ow + ox];
                    if (grads) grads->bias[oc] += g;
                    for (std::size_t ic = 0; ic < in_ch; ++ic) {
                        for (std::size_t ky = 0; ky < kh; ++ky) {
                            const long iy = static_cast<long>(oy * conv->stride + ky) - pad;
                            if (iy < 0 || iy >= static_cast<long>(h)) continue;
                            for (std::size_t kx = 0; kx < kw; ++kx) {
                                const long ix = static_cast<long>(ox * conv->stride + kx) - pad;
                                if (ix < 0 || ix >= static_cast<long>(w)) continue;
                                const std::size_t xi = (ic * h + iy) * w + ix;
                                const std::size_t ki = ((oc * in_ch + ic) * kh + ky) * kw + kx;
                                dx[xi] += conv->kernels[ki] * g;
                                if (grads) grads->weights[ki] += x[xi] * g;
                            }
                        }
                    }
                }
            }
        }
        return dx;
    }
    if (std::holds_alternative<ReluLayer>(layer)) {
        Tensor dx(x.shape());
        // Subgradient at exactly 0 is 0 (strict comparison).
        for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
        return dx;
    }
    if (const auto* pool = std::get_if<MaxPool2dLayer>(&layer)) {
        const std::size_t ch = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
        const std::size_t oh = dy.shape()[1], ow = dy.shape()[2];
        Tensor dx(x.shape());
        for (std::size_t c = 0; c < ch; ++c) {
            for (std::size_t oy = 0; oy < oh; ++oy) {
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    double best = -std::numeric_limits<double>::infinity();
                    std::size_t best_idx = 0;
                    for (std::size_t py = 0; py < pool->window; ++py) {
                        for (std::size_t px = 0; px < pool->window; ++px) {
                            const std::size_t iy = oy * pool->stride + py;
                            const std::size_t ix = ox * pool->stride + px;
                            const std::size_t xi = (c * h + iy) * w + ix;
                            if (x[xi] > best) {
                                best = x[xi];
                                best_idx = xi;
                            }
                        }
                    }
                    dx[best_idx] += dy[(c * oh + oy) * ow + ox];
                }
            }
        }
        return dx;
    }
    // flatten
    Tensor dx = dy;
    return Tensor(x.shape(), std::move(dx.values()));
}

std::vector<Tensor> forward_trace(const std::vector<Layer>& layers, const Tensor& x) {
    std::vector<Tensor> trace;
    trace.reserve(layers.size() + 1);
    trace.push_back(x);
    for (const Layer& layer : layers) trace.push_back(apply_layer(layer, trace.back()));
    return trace;
}

Tensor backward_from_trace(const std::vector<Layer>& layers,
                           const std::vector<Tensor>& trace, const Tensor& upstream,
                           std::vector<LayerGrads>* param_grads) {
    if (param_grads) param_grads->assign(layers.size(), LayerGrads{});
    Tensor grad = upstream;
    for (std::size_t i = layers.size(); i-- > 0;) {
        LayerGrads* slot = param_grads ? &(*param_grads)[i] : nullptr;
        grad = backprop_layer(layers[i], trace[i], grad, slot);
    }
    return grad;
}

}  // namespace detail

Network::Network(std::vector<Layer> layers, std::vector<std::size_t> input_shape)
    : layers_(std::move(layers)), input_shape_(std::move(input_shape)) {
    if (layers_.empty()) fail_invalid("network must have at least one layer");
    if (input_shape_.empty()) fail_invalid("network input shape must be non-empty");
    for (std::size_t d : input_shape_)
        if (d == 0) fail_invalid("network input dimensions must be positive");

    std::vector<std::size_t> shape = input_shape_;
    layer_output_shapes_.reserve(layers_.size());
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        shape = detail::layer_output_shape(layers_[i], shape, i);
        layer_output_shapes_.push_back(shape);
    }
    if (shape.size() != 1)
        fail_invalid("network output must be a logit vector, got shape " +
                     Tensor(shape).shape_string());
    num_classes_ = shape[0];
}

void Network::check_input(const Tensor& x) const {
    if (x.shape() != input_shape_)
        fail_invalid("input shape " + x.shape_string() + " does not match network input " +
                     Tensor(input_shape_).shape_string());
}

Tensor Network::forward(const Tensor& x) const {
    check_input(x);
    Tensor cur = x;
    for (const Layer& layer : layers_) cur = detail::apply_layer(layer, cur);
    return cur;
}

Tensor Network::input_gradient(const Tensor& x, const Tensor& upstream) const {
    return backward(x, upstream, nullptr);
}

Tensor Network::backward(const Tensor& x, const Tensor& upstream,
                         std::vector<LayerGrads>* param_grads) const {
    check_input(x);
    if (upstream.rank() != 1 || upstream.shape()[0] != num_classes_)
        fail_invalid("upstream gradient must have length " + std::to_string(num_classes_) +
                     ", got shape " + upstream.shape_string());
    const std::vector<Tensor> trace = detail::forward_trace(layers_, x);
    return detail::backward_from_trace(layers_, trace, upstream, param_grads);
}

Tensor softmax(const Tensor& logits) {
    if (logits.size() == 0) fail_invalid("softmax of empty logits");
    double m = logits[0];
    for (std::size_t i = 1; i < logits.size(); ++i) m = std::max(m, logits[i]);
    Tensor out(logits.shape());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        sum += out[i];
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= sum;
    return out;
}

}  // namespace osradv
