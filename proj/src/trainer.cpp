#include "trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rng.hpp"
#include "scoring.hpp"

namespace osradv {

namespace {

Tensor he_normal(std::vector<std::size_t> shape, std::size_t fan_in, Rng& rng) {
    Tensor t(std::move(shape));
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal(0.0, stddev);
    return t;
}

std::size_t flat_size(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

void sgd_step(Layer& layer, const LayerGrads& grads, double lr) {
    if (auto* dense = std::get_if<DenseLayer>(&layer)) {
        for (std::size_t i = 0; i < dense->weights.size(); ++i)
            dense->weights[i] -= lr * grads.weights[i];
        for (std::size_t i = 0; i < dense->bias.size(); ++i)
            dense->bias[i] -= lr * grads.bias[i];
    } else if (auto* conv = std::get_if<Conv2dLayer>(&layer)) {
        for (std::size_t i = 0; i < conv->kernels.size(); ++i)
            conv->kernels[i] -= lr * grads.weights[i];
        for (std::size_t i = 0; i < conv->bias.size(); ++i)
            conv->bias[i] -= lr * grads.bias[i];
    }
}

}  // namespace

Network make_toy_network(const std::vector<std::size_t>& input_shape,
                         std::size_t num_classes, const ToyArchConfig& arch,
                         std::uint64_t seed) {
    if (input_shape.size() != 3)
        fail_invalid("toy network expects a (channels, height, width) input shape");
    if (num_classes < 2) fail_invalid("toy network needs at least 2 classes");
    ToyArchConfig a = arch;
    if (a.conv1_channels == 0) a.conv1_channels = ToyArchConfig{}.conv1_channels;
    if (a.conv2_channels == 0) a.conv2_channels = ToyArchConfig{}.conv2_channels;
    if (a.dense_hidden == 0) a.dense_hidden = ToyArchConfig{}.dense_hidden;

    const std::size_t in_ch = input_shape[0];
    Rng rng(Rng::derive(seed, 0xA11C));

    std::vector<Layer> layers;
    layers.push_back(Conv2dLayer{
        he_normal({a.conv1_channels, in_ch, 3, 3}, in_ch * 9, rng),
        Tensor({a.conv1_channels}), 1, 1});
    layers.push_back(ReluLayer{});
    layers.push_back(MaxPool2dLayer{2, 2});
    layers.push_back(Conv2dLayer{
        he_normal({a.conv2_channels, a.conv1_channels, 3, 3}, a.conv1_channels * 9, rng),
        Tensor({a.conv2_channels}), 1, 1});
    layers.push_back(ReluLayer{});
    layers.push_back(MaxPool2dLayer{2, 2});
    layers.push_back(FlattenLayer{});

    // Probe the conv stack's output size to wire the dense head.
    const std::size_t flat =
        flat_size(Network(layers, input_shape).forward(Tensor(input_shape)).shape());
    layers.push_back(DenseLayer{he_normal({a.dense_hidden, flat}, flat, rng),
                                Tensor({a.dense_hidden})});
    layers.push_back(ReluLayer{});
    layers.push_back(DenseLayer{
        he_normal({num_classes, a.dense_hidden}, a.dense_hidden, rng),
        Tensor({num_classes})});
    return Network(std::move(layers), input_shape);
}

TrainOutcome train_toy_model(const Dataset& train, const TrainConfig& cfg) {
    if (train.samples.empty()) fail_invalid("training set is empty");
    std::uint32_t max_label = 0;
    for (const Sample& s : train.samples) {
        if (s.set_label != SetLabel::familiar || !s.class_label)
            fail_invalid("training set must contain only labelled familiar samples ('" +
                         s.id + "' is not)");
        max_label = std::max(max_label, *s.class_label);
    }
    const std::size_t num_classes = std::size_t{max_label} + 1;
    if (num_classes < 2) fail_invalid("training needs at least 2 classes");
    if (cfg.lr < 0.0) fail_invalid("learning rate must be >= 0");

    const std::vector<std::size_t>& input_shape = train.samples.front().image.shape();
    Network net = make_toy_network(input_shape, num_classes, cfg.arch, cfg.seed);
    std::vector<Layer> layers = net.layers();

    Rng shuffle_rng(Rng::derive(cfg.seed, 0x5D0F));
    std::vector<std::size_t> order(train.samples.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> epoch_loss;
    std::vector<LayerGrads> grads;
    for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t idx : order) {
            const Sample& s = train.samples[idx];
            const std::vector<Tensor> trace = detail::forward_trace(layers, s.image);
            const Tensor& logits = trace.back();

            Tensor probs = softmax(logits);
            const double p = probs[*s.class_label];
            const double loss = -std::log(std::max(p, 1e-300));
            loss_sum += loss;
            if (!std::isfinite(loss))
                fail_numeric("training diverged (non-finite loss in epoch " +
                             std::to_string(epoch) + "); try a lower learning rate");

            // d(cross-entropy)/d(logits) = softmax - one_hot(label)
            Tensor upstream = probs;
            upstream[*s.class_label] -= 1.0;
            detail::backward_from_trace(layers, trace, upstream, &grads);
            for (std::size_t li = 0; li < layers.size(); ++li)
                sgd_step(layers[li], grads[li], cfg.lr);
        }
        epoch_loss.push_back(loss_sum / static_cast<double>(train.samples.size()));
    }

    TrainOutcome out{Network(std::move(layers), input_shape), 0.0, std::move(epoch_loss)};
    out.train_accuracy = closed_set_accuracy(out.net, train);
    return out;
}

double closed_set_accuracy(const Network& net, const Dataset& data) {
    std::size_t total = 0, correct = 0;
    for (const Sample& s : data.samples) {
        if (s.set_label != SetLabel::familiar || !s.class_label) continue;
        ++total;
        if (argmax_class(net.forward(s.image)) == *s.class_label) ++correct;
    }
    if (total == 0) fail_invalid("no labelled familiar samples to score");
    return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace osradv
