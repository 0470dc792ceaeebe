#pragma once

#include <cstdint>
#include <vector>

#include "dataset.hpp"
#include "network.hpp"

namespace osradv {

// Two conv blocks and two dense layers; zeros fall back to the defaults.
struct ToyArchConfig {
    std::uint32_t conv1_channels = 8;
    std::uint32_t conv2_channels = 16;
    std::uint32_t dense_hidden = 32;
};

struct TrainConfig {
    ToyArchConfig arch;
    std::uint32_t epochs = 40;
    double lr = 0.05;
    std::uint64_t seed = 1;
};

struct TrainOutcome {
    Network net;
    double train_accuracy = 0.0;
    std::vector<double> epoch_mean_loss;
};

// Untrained toy network with seeded He-normal weights for the given input
// shape and class count.
Network make_toy_network(const std::vector<std::size_t>& input_shape,
                         std::size_t num_classes, const ToyArchConfig& arch,
                         std::uint64_t seed);

// Minimal per-sample SGD with softmax cross-entropy. Single-threaded and
// bit-reproducible for a fixed seed. Raises a numeric error when the loss
// goes non-finite.
TrainOutcome train_toy_model(const Dataset& train, const TrainConfig& cfg);

// Fraction of familiar samples whose argmax logit equals their class label.
double closed_set_accuracy(const Network& net, const Dataset& data);

}  // namespace osradv
