#include <doctest.h>

#include <cmath>
#include <cstring>

#include "attacks.hpp"
#include "support/test_support.hpp"

using namespace osradv;
using namespace testsupport;

namespace {

Network identity_net(std::size_t n) {
    Tensor w({n, n});
    for (std::size_t i = 0; i < n; ++i) w[i * n + i] = 1.0;
    return Network({DenseLayer{std::move(w), Tensor({n})}}, {n});
}

AttackConfig fgsm_config(Objective obj, AttackDirection dir, double eps,
                         bool clamp = true) {
    AttackConfig cfg;
    cfg.method = AttackMethod::fgsm;
    cfg.objective = obj;
    cfg.direction = dir;
    cfg.epsilon = eps;
    cfg.clamp_data_range = clamp;
    return cfg;
}

}  // namespace

TEST_CASE("signed_direction: ffam ascends, fnov descends") {
    CHECK(signed_direction(AttackDirection::false_familiarity) == 1.0);
    CHECK(signed_direction(AttackDirection::false_novelty) == -1.0);
}

TEST_CASE("fgsm: identity net, hand-evaluated step") {
    const Network net = identity_net(2);
    const Tensor x = Tensor::from_vector({0.2, 0.7});

    const AttackResult up = fgsm_attack(
        net, fgsm_config(Objective::max_logit, AttackDirection::false_familiarity, 0.1),
        x);
    CHECK(up.x_adv[0] == 0.2);  // gradient is one-hot at index 1
    CHECK(up.x_adv[1] == doctest::Approx(0.8).epsilon(1e-15));

    const AttackResult down = fgsm_attack(
        net, fgsm_config(Objective::max_logit, AttackDirection::false_novelty, 0.1), x);
    CHECK(down.x_adv[0] == 0.2);
    CHECK(down.x_adv[1] == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("fgsm: perturbation is exactly epsilon where the gradient is nonzero") {
    Rng rng(11);
    const Network net = random_toy_net(rng, 6, 3);
    const Tensor x = random_tensor({1, 6, 6}, rng, 0.3, 0.7);
    const double eps = 1e-6;
    const AttackConfig cfg =
        fgsm_config(Objective::two_norm, AttackDirection::false_familiarity, eps);
    const Tensor grad = input_objective_gradient(net, Objective::two_norm, x);
    const AttackResult res = fgsm_attack(net, cfg, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (grad[i] != 0.0)
            CHECK(std::fabs(res.x_adv[i] - x[i]) ==
                  doctest::Approx(eps).epsilon(1e-9));
        else
            CHECK(res.x_adv[i] == x[i]);
    }
}

TEST_CASE("iterate: clip projects a long step back onto the epsilon box") {
    const Network net = identity_net(1);
    AttackConfig cfg;
    cfg.method = AttackMethod::bim;
    cfg.objective = Objective::max_logit;
    cfg.direction = AttackDirection::false_familiarity;
    cfg.epsilon = 0.1;
    cfg.bim.alpha = 0.25;  // proposes 0.5 + 0.25 = 0.75
    cfg.bim.iters = 1;
    const AttackResult res = iterate_attack(net, cfg, Tensor::from_vector({0.5}));
    CHECK(res.x_adv[0] == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("bim(alpha=eps, iters=1) is bit-exactly fgsm") {
    Rng rng(321);
    for (int trial = 0; trial < 60; ++trial) {
        const Network net = random_toy_net(rng, 6, 3);
        const Tensor x = random_tensor({1, 6, 6}, rng);
        AttackConfig cfg;
        cfg.objective = random_objective(rng);
        cfg.direction = rng.below(2) ? AttackDirection::false_familiarity
                                     : AttackDirection::false_novelty;
        cfg.epsilon = rng.uniform(0.01, 0.5);
        cfg.clamp_data_range = rng.below(2) == 0;

        cfg.method = AttackMethod::fgsm;
        const AttackResult a = fgsm_attack(net, cfg, x);

        cfg.method = AttackMethod::bim;
        cfg.bim.alpha = cfg.epsilon;
        cfg.bim.iters = 1;
        const AttackResult b = iterate_attack(net, cfg, x);

        REQUIRE(a.x_adv.size() == b.x_adv.size());
        CHECK(std::memcmp(a.x_adv.data(), b.x_adv.data(),
                          a.x_adv.size() * sizeof(double)) == 0);
        CHECK(a.iterations_run == b.iterations_run);
    }
}

TEST_CASE("budget: every method stays inside the epsilon box and [0,1]") {
    Rng rng(77);
    for (int trial = 0; trial < 150; ++trial) {
        const Network net = random_toy_net(rng, 6, 3);
        const Tensor x = random_tensor({1, 6, 6}, rng);
        AttackConfig cfg;
        cfg.objective = random_objective(rng);
        cfg.direction = rng.below(2) ? AttackDirection::false_familiarity
                                     : AttackDirection::false_novelty;
        cfg.epsilon = rng.uniform(0.01, 0.5);
        cfg.bim.iters = 5;
        cfg.rprop.iters = 8;
        switch (rng.below(3)) {
            case 0: cfg.method = AttackMethod::fgsm; break;
            case 1: cfg.method = AttackMethod::bim; break;
            default: cfg.method = AttackMethod::rprop; break;
        }

        const AttackResult res = run_attack(net, cfg, x);
        CHECK(res.linf_max <= cfg.epsilon + 1e-12);
        for (std::size_t i = 0; i < res.x_adv.size(); ++i) {
            CHECK(std::fabs(res.x_adv[i] - x[i]) <= cfg.epsilon + 1e-12);
            CHECK(res.x_adv[i] >= 0.0);
            CHECK(res.x_adv[i] <= 1.0);
        }
        CHECK(res.objective_trace.size() ==
              static_cast<std::size_t>(res.iterations_run) + 1);
    }
}

TEST_CASE("rprop_step_state_update: the iRprop- rule") {
    RpropParams p;
    p.eta_plus = 1.2;
    p.eta_minus = 0.5;
    p.delta0 = 0.01;
    p.delta_min = 1e-6;
    p.delta_max = 1.0;

    SUBCASE("first iteration leaves the step size at delta0") {
        const auto u = rprop_step_state_update(0.01, 0.4, 0.0, p);
        CHECK(u.step_size == 0.01);
        CHECK(u.move_sign == 1.0);
        CHECK(u.next_prev_grad == 0.4);
    }

    SUBCASE("consecutive same-sign gradients grow the step geometrically") {
        double step = 0.01;
        const double expected[] = {0.01, 0.012, 0.0144};
        double prev = 0.0;
        for (int i = 0; i < 3; ++i) {
            const auto u = rprop_step_state_update(step, 1.0, prev, p);
            CHECK(u.step_size == doctest::Approx(expected[i]).epsilon(1e-12));
            step = u.step_size;
            prev = u.next_prev_grad;
        }
    }

    SUBCASE("a sign flip halves the step and skips one update") {
        const auto flip = rprop_step_state_update(0.01, -1.0, 1.0, p);
        CHECK(flip.step_size == doctest::Approx(0.005).epsilon(1e-12));
        CHECK(flip.move_sign == 0.0);
        CHECK(flip.next_prev_grad == 0.0);
        // Next iteration: product with zero is zero, so the step resumes
        // without resizing.
        const auto resume = rprop_step_state_update(flip.step_size, -1.0,
                                                    flip.next_prev_grad, p);
        CHECK(resume.step_size == doctest::Approx(0.005).epsilon(1e-12));
        CHECK(resume.move_sign == -1.0);
    }

    SUBCASE("step sizes respect the floor and cap") {
        const auto capped = rprop_step_state_update(0.9, 1.0, 1.0, p);
        CHECK(capped.step_size == 1.0);
        const auto floored = rprop_step_state_update(1.5e-6, -1.0, 1.0, p);
        CHECK(floored.step_size == 1e-6);
    }
}

TEST_CASE("rprop: zero-gradient pixels stay put while live ones reach the boundary") {
    // Two of four pixels feed the logit; the other two have exactly zero
    // gradient throughout.
    Tensor w({1, 4}, {1, 0, 1, 0});
    const Network net({DenseLayer{std::move(w), Tensor({1})}}, {4});

    AttackConfig cfg;
    cfg.method = AttackMethod::rprop;
    cfg.objective = Objective::max_logit;
    cfg.direction = AttackDirection::false_familiarity;
    cfg.epsilon = 0.1;
    cfg.rprop.iters = 30;

    const Tensor x = Tensor::from_vector({0.5, 0.5, 0.5, 0.5});
    const AttackResult res = iterate_attack(net, cfg, x);
    CHECK(res.x_adv[1] == x[1]);
    CHECK(res.x_adv[3] == x[3]);
    CHECK(res.x_adv[0] == x[0] + cfg.epsilon);
    CHECK(res.x_adv[2] == x[2] + cfg.epsilon);
}

TEST_CASE("fgsm first-order efficacy at tiny epsilon") {
    Rng rng(2718);
    int ffam_fail = 0, fnov_fail = 0;
    const int trials = 500;
    for (int t = 0; t < trials; ++t) {
        const Network net = random_toy_net(rng, 6, 3);
        const Tensor x = random_tensor({1, 6, 6}, rng);
        const Objective obj = random_objective(rng);

        const AttackResult up = fgsm_attack(
            net, fgsm_config(obj, AttackDirection::false_familiarity, 1e-4), x);
        if (up.objective_trace.back() < up.objective_trace.front()) ++ffam_fail;

        const AttackResult down =
            fgsm_attack(net, fgsm_config(obj, AttackDirection::false_novelty, 1e-4), x);
        if (down.objective_trace.back() > down.objective_trace.front()) ++fnov_fail;
    }
    // Allow up to 1% kink crossings.
    CHECK(ffam_fail <= trials / 100);
    CHECK(fnov_fail <= trials / 100);
}

TEST_CASE("rprop beats fgsm on the objective in at least 90% of runs") {
    Rng rng(1618);
    const Network net = random_toy_net(rng, 8, 4);
    int wins = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const Tensor x = random_tensor({1, 8, 8}, rng);
        AttackConfig cfg =
            fgsm_config(Objective::max_logit, AttackDirection::false_familiarity, 0.08);
        const AttackResult single = fgsm_attack(net, cfg, x);

        cfg.method = AttackMethod::rprop;
        cfg.rprop.iters = 20;
        const AttackResult multi = iterate_attack(net, cfg, x);
        if (multi.objective_trace.back() >= single.objective_trace.back()) ++wins;
    }
    CHECK(wins >= trials * 9 / 10);
}

TEST_CASE("config validation") {
    AttackConfig cfg;
    cfg.epsilon = 0.0;
    CHECK_THROWS_AS(resolve_config(cfg), Error);

    cfg.epsilon = 0.1;
    cfg.rprop.eta_minus = 1.5;
    CHECK_THROWS_AS(resolve_config(cfg), Error);

    cfg.rprop.eta_minus = 0.5;
    cfg.rprop.delta_min = 0.2;  // above delta_max = eps
    CHECK_THROWS_AS(resolve_config(cfg), Error);

    AttackConfig ok;
    ok.epsilon = 0.2;
    const AttackConfig r = resolve_config(ok);
    CHECK(r.bim.alpha == doctest::Approx(0.05));
    CHECK(r.rprop.delta0 == doctest::Approx(0.02));
    CHECK(r.rprop.delta_max == doctest::Approx(0.2));
}

TEST_CASE("attack input outside [0,1] is rejected when clamping") {
    const Network net = identity_net(2);
    const AttackConfig cfg =
        fgsm_config(Objective::max_logit, AttackDirection::false_familiarity, 0.1);
    CHECK_THROWS_AS(fgsm_attack(net, cfg, Tensor::from_vector({1.5, 0.2})), Error);
}

TEST_CASE("iterate: errors during an iteration name the iteration") {
    // Huge weights overflow the forward pass, so the objective's finiteness
    // check trips inside iteration 0.
    Tensor w({1, 1}, {1e308});
    const Network net({DenseLayer{std::move(w), Tensor({1})}}, {1});
    AttackConfig cfg;
    cfg.method = AttackMethod::bim;
    cfg.objective = Objective::sum_exp;
    cfg.direction = AttackDirection::false_familiarity;
    cfg.epsilon = 0.1;
    CHECK_THROWS_WITH_AS(iterate_attack(net, cfg, Tensor::from_vector({0.9})),
                         doctest::Contains("iteration 0"), Error);
}
