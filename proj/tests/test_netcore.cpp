#include <doctest.h>

#include <cstring>

#include "network.hpp"
#include "support/test_support.hpp"

using namespace osradv;
using namespace testsupport;

namespace {

Network identity_dense_2() {
    DenseLayer dense{Tensor({2, 2}, {1, 0, 0, 1}), Tensor({2})};
    return Network({dense}, {2});
}

bool bits_equal(const Tensor& a, const Tensor& b) {
    return a.shape() == b.shape() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("forward: identity dense layer passes values through") {
    const Network net = identity_dense_2();
    const Tensor out = net.forward(Tensor::from_vector({1.5, -2.0}));
    CHECK(out[0] == 1.5);
    CHECK(out[1] == -2.0);
}

TEST_CASE("forward: 2x2 dense by hand") {
    DenseLayer dense{Tensor({2, 2}, {1, 1, 1, -1}), Tensor({2})};
    const Network net({dense}, {2});
    const Tensor out = net.forward(Tensor::from_vector({2, 3}));
    CHECK(out[0] == 5.0);
    CHECK(out[1] == -1.0);
}

TEST_CASE("forward: random conv/dense nets match the straight-loop reference") {
    Rng rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        const Network net = random_toy_net(rng, 8, 4);
        const Tensor x = random_tensor({1, 8, 8}, rng);
        const Tensor got = net.forward(x);
        const std::vector<double> want = reference_forward(net, x);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i)
            CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
}

TEST_CASE("forward and input_gradient are pure (bit-identical reruns)") {
    Rng rng(7);
    const Network net = random_toy_net(rng, 6, 3);
    const Tensor x = random_tensor({1, 6, 6}, rng);
    const Tensor upstream = random_tensor({3}, rng, -1.0, 1.0);

    CHECK(bits_equal(net.forward(x), net.forward(x)));
    CHECK(bits_equal(net.input_gradient(x, upstream), net.input_gradient(x, upstream)));
}

TEST_CASE("input_gradient: linear layer gives W^T upstream") {
    DenseLayer dense{Tensor({2, 2}, {1, 1, 1, -1}), Tensor({2})};
    const Network net({dense}, {2});
    const Tensor g =
        net.input_gradient(Tensor::from_vector({0.3, 0.4}), Tensor::from_vector({1, 0}));
    CHECK(g[0] == 1.0);
    CHECK(g[1] == 1.0);
}

TEST_CASE("input_gradient: relu kills gradients at negative pre-activations") {
    // logits = relu(x) fed through identity; x[1] < 0 so its path is dead.
    std::vector<Layer> layers{ReluLayer{},
                              DenseLayer{Tensor({2, 2}, {1, 0, 0, 1}), Tensor({2})}};
    const Network net(layers, {2});
    const Tensor g =
        net.input_gradient(Tensor::from_vector({0.5, -0.5}), Tensor::from_vector({1, 1}));
    CHECK(g[0] == 1.0);
    CHECK(g[1] == 0.0);
}

TEST_CASE("input_gradient: relu subgradient at exactly zero is zero") {
    // Pre-activation is exactly 0: dense shifts x by -1, then relu.
    std::vector<Layer> layers{DenseLayer{Tensor({1, 1}, {1}), Tensor({1}, {-1})},
                              ReluLayer{}};
    const Network net(layers, {1});
    const Tensor g =
        net.input_gradient(Tensor::from_vector({1.0}), Tensor::from_vector({1}));
    CHECK(g[0] == 0.0);
}

TEST_CASE("input_gradient: maxpool ties route to the first row-major element") {
    // 2x2 input, one pool window, all values equal.
    std::vector<Layer> layers{MaxPool2dLayer{2, 2}, FlattenLayer{}};
    const Network net(layers, {1, 2, 2});
    const Tensor x({1, 2, 2}, {0.7, 0.7, 0.7, 0.7});
    const Tensor g = net.input_gradient(x, Tensor::from_vector({1}));
    CHECK(g[0] == 1.0);
    CHECK(g[1] == 0.0);
    CHECK(g[2] == 0.0);
    CHECK(g[3] == 0.0);
}

TEST_CASE("input_gradient: conv net matches finite differences") {
    Rng rng(99);
    const Network net = random_toy_net(rng, 6, 3);
    const Tensor x = random_tensor({1, 6, 6}, rng);
    const Tensor upstream = random_tensor({3}, rng, -1.0, 1.0);

    const Tensor analytic = net.input_gradient(x, upstream);
    const Tensor fd = finite_difference_gradient(
        [&](const Tensor& probe) {
            const Tensor logits = net.forward(probe);
            double acc = 0.0;
            for (std::size_t i = 0; i < logits.size(); ++i) acc += upstream[i] * logits[i];
            return acc;
        },
        x);
    CHECK(max_rel_error(analytic, fd) < 1e-6);
}

TEST_CASE("input_gradient: finite-difference property over 100 random triples") {
    Rng rng(1234);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const bool dense_only = trial % 3 == 0;
        const Network net =
            dense_only ? random_dense_net(rng, 5, 3) : random_toy_net(rng, 6, 3);
        const Tensor x = dense_only ? random_tensor({5}, rng, -1.0, 1.0)
                                    : random_tensor({1, 6, 6}, rng);
        Tensor upstream({net.num_classes()});
        for (std::size_t i = 0; i < upstream.size(); ++i)
            upstream[i] = rng.uniform(-1.0, 1.0);

        const Tensor analytic = net.input_gradient(x, upstream);
        const Tensor fd = finite_difference_gradient(
            [&](const Tensor& probe) {
                const Tensor logits = net.forward(probe);
                double acc = 0.0;
                for (std::size_t i = 0; i < logits.size(); ++i)
                    acc += upstream[i] * logits[i];
                return acc;
            },
            x);
        CHECK(max_rel_error(analytic, fd) < 1e-6);
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("softmax: symmetry, stability and frozen values") {
    const Tensor sym = softmax(Tensor::from_vector({0, 0}));
    CHECK(sym[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sym[1] == doctest::Approx(0.5).epsilon(1e-15));

    const Tensor big = softmax(Tensor::from_vector({1000, 0}));
    CHECK(big.all_finite());
    CHECK(big[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(big[1] == doctest::Approx(0.0).epsilon(1e-12));

    const Tensor p = softmax(Tensor::from_vector({1, 2, 3}));
    CHECK(p[0] == doctest::Approx(0.09003057).epsilon(1e-7));
    CHECK(p[1] == doctest::Approx(0.24472847).epsilon(1e-7));
    CHECK(p[2] == doctest::Approx(0.66524096).epsilon(1e-7));
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += p[i];
    CHECK(std::fabs(sum - 1.0) <= 1e-12);
}

TEST_CASE("construction: shape mismatches name the offending layer") {
    std::vector<Layer> layers{DenseLayer{Tensor({2, 3}, {1, 0, 0, 0, 1, 0}), Tensor({2})}};
    CHECK_THROWS_WITH_AS(Network(layers, {2}), doctest::Contains("layer 0"), Error);

    std::vector<Layer> deep{
        DenseLayer{Tensor({2, 2}, {1, 0, 0, 1}), Tensor({2})},
        DenseLayer{Tensor({2, 5}, std::vector<double>(10, 0.0)), Tensor({2})}};
    CHECK_THROWS_WITH_AS(Network(deep, {2}), doctest::Contains("layer 1"), Error);
}

TEST_CASE("forward: input shape mismatch raises") {
    const Network net = identity_dense_2();
    CHECK_THROWS_AS(net.forward(Tensor::from_vector({1, 2, 3})), Error);
    CHECK_THROWS_AS(
        net.input_gradient(Tensor::from_vector({1, 2}), Tensor::from_vector({1, 2, 3})),
        Error);
}

TEST_CASE("tensor: invariants") {
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0}), Error);
    CHECK_THROWS_AS(Tensor({0}), Error);
    const Tensor t({2, 3});
    CHECK(t.size() == 6);
    CHECK(t.all_finite());
}
