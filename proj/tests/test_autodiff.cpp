// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "tspgnn/params.hpp"
#include "tspgnn/rng.hpp"
#include "tspgnn/tape.hpp"

using namespace tspgnn;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t = Tensor::matrix(r, c);
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

}  // namespace

TEST_SUITE("autodiff") {

TEST_CASE("matmul gradient matches finite differences") {
    Rng rng(1);
    ParamStore store;
    store.add("a", random_tensor(3, 4, rng));
    store.add("b", random_tensor(4, 2, rng));

    auto loss = [&]() {
        Tape tape;
        TapedParams taped(tape, store);
        Var c = tape.matmul(taped["a"], taped["b"]);
        return tape.value(tape.mean_all(c))[0] * static_cast<double>(tape.value(c).numel());
    };

    {
        Tape tape;
        TapedParams taped(tape, store);
        Var c = tape.matmul(taped["a"], taped["b"]);
        Var s = tape.scale(tape.mean_all(c), static_cast<double>(tape.value(c).numel()));
        tape.backward(s);
        store.zero_grads();
        taped.accumulate_grads(store);
    }
    auto report = gradcheck::against_finite_differences(store, loss);
    CHECK_MESSAGE(report.max_rel_err < 1e-6, report.worst_param, " rel err ",
                  report.max_rel_err);
}

TEST_CASE("every primitive passes a finite-difference check") {
    Rng rng(2);
    ParamStore store;
    store.add("x", random_tensor(3, 5, rng));
    store.add("y", random_tensor(3, 5, rng));
    store.add("bias", random_tensor(1, 5, rng));
    store.add("gain", random_tensor(1, 5, rng, 0.5, 1.5));

    EdgePairs edges = {{0, 1}, {0, 2}, {1, 2}};
    Tensor labels({3, 1}, {1.0, 0.0, 1.0});
    Tensor projection = random_tensor(10, 1, rng);

    // One expression through every primitive, re-buildable for the oracle.
    auto build = [&](Tape& tape, TapedParams& taped) {
        Var x = taped["x"];
        Var y = taped["y"];
        Var sum = tape.add(x, y);
        Var biased = tape.add_row_broadcast(sum, taped["bias"]);
        Var normed = tape.layer_norm(biased, taped["gain"], taped["bias"], 1e-5);
        Var gated = tape.mul(tape.sigmoid(normed), tape.relu(x));
        Var mixed = tape.concat_cols(gated, y);
        // mixed is 3x10; treat rows as edges of a triangle and aggregate.
        Var verts = tape.edge_to_vertex(mixed, edges, 3);
        Var back = tape.vertex_to_edge(verts, edges);
        Var col = tape.segment_mean(tape.matmul(back, tape.constant(projection)),
                                    {{0, 1}, {1, 2}, {2, 3}});
        return tape.bce_with_logits(col, labels);
    };

    auto loss = [&]() {
        Tape tape;
        TapedParams taped(tape, store);
        return tape.value(build(tape, taped))[0];
    };

    {
        Tape tape;
        TapedParams taped(tape, store);
        tape.backward(build(tape, taped));
        store.zero_grads();
        taped.accumulate_grads(store);
    }
    auto report = gradcheck::against_finite_differences(store, loss);
    CHECK_MESSAGE(report.max_rel_err < 1e-5, report.worst_param, "[", report.worst_index,
                  "] analytic ", report.analytic, " numeric ", report.numeric);
}

TEST_CASE("backward basics") {
    ParamStore store;
    store.add("p", Tensor({2, 2}, {1, 2, 3, 4}));
    store.add("q", Tensor({2, 2}, {5, 6, 7, 8}));

    Tape tape;
    TapedParams taped(tape, store);
    // Loss touches only p; q must end with a zero gradient.
    Var s = tape.scale(tape.mean_all(taped["p"]), 4.0);
    tape.backward(s);
    store.zero_grads();
    taped.accumulate_grads(store);

    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(store.grad("p")[i] == 1.0);
        CHECK(store.grad("q")[i] == 0.0);
    }

    CHECK_THROWS_AS(tape.backward(s), InternalError);
}

TEST_CASE("bce with logits") {
    // logit 0, label 1 -> ln 2.
    {
        Tape tape;
        Var logit = tape.leaf(Tensor::scalar(0.0));
        Var loss = tape.bce_with_logits(logit, Tensor::scalar(1.0));
        CHECK(tape.value(loss)[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }
    // Saturated positive logit with label 1 -> ~0.
    {
        Tape tape;
        Var logit = tape.leaf(Tensor::scalar(20.0));
        Var loss = tape.bce_with_logits(logit, Tensor::scalar(1.0));
        CHECK(tape.value(loss)[0] < 1e-8);
    }
    // Analytic gradient (sigmoid(x) - y)/k on random logits.
    {
        Rng rng(4);
        Tape tape;
        Tensor logits = random_tensor(5, 1, rng, -3.0, 3.0);
        Tensor labels({5, 1}, {1, 0, 1, 1, 0});
        Var lv = tape.leaf(logits);
        Var loss = tape.bce_with_logits(lv, labels);
        tape.backward(loss);
        Tensor g = tape.grad_of(lv);
        for (std::size_t i = 0; i < 5; ++i) {
            const double want = (sigmoid(logits[i]) - labels[i]) / 5.0;
            CHECK(g[i] == doctest::Approx(want).epsilon(1e-9));
        }
    }
    // Nonnegative; ln 2 at all-zero logits.
    {
        Tape tape;
        Var lv = tape.leaf(Tensor::matrix(4, 1));
        Var loss = tape.bce_with_logits(lv, Tensor({4, 1}, {1, 0, 0, 1}));
        CHECK(tape.value(loss)[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }
}

TEST_CASE("forward determinism") {
    Rng rng(5);
    ParamStore store;
    store.add("w", random_tensor(4, 4, rng));
    Tensor input = random_tensor(2, 4, rng);

    auto run = [&]() {
        Tape tape;
        TapedParams taped(tape, store);
        Var out = tape.relu(tape.matmul(tape.constant(input), taped["w"]));
        return tape.value(out);
    };
    Tensor first = run();
    Tensor second = run();
    CHECK(first == second);  // bitwise
}

}  // TEST_SUITE
