#include <cmath>
#include <random>

#include "doctest.h"
#include "depwise/tensor.hpp"

using namespace depwise;

TEST_CASE("make_tensor validates shape against data length") {
    auto t = make_tensor({1, 2, 3, 4, 5, 6}, {2, 3});
    CHECK(t->is_matrix());
    CHECK(t->rows() == 2);
    CHECK(t->cols() == 3);
    CHECK_THROWS_AS(make_tensor({1, 2, 3}, {2, 2}), DimensionError);
}

TEST_CASE("add, scale, mul against loops") {
    auto a = make_vector({1.0, -2.0, 3.0});
    auto b = make_vector({0.5, 4.0, -1.0});
    auto s = add(a, b);
    auto c = scale(a, -2.0);
    auto m = mul(a, b);
    for (int i = 0; i < 3; ++i) {
        CHECK(s->data[i] == a->data[i] + b->data[i]);
        CHECK(c->data[i] == -2.0 * a->data[i]);
        CHECK(m->data[i] == a->data[i] * b->data[i]);
    }
    CHECK_THROWS_AS(add(a, make_vector({1.0, 2.0})), DimensionError);
}

TEST_CASE("matvec matches an explicit loop") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> md(12), vd(4);
    for (auto& x : md) x = u(rng);
    for (auto& x : vd) x = u(rng);
    auto m = make_tensor(md, {3, 4});
    auto v = make_vector(vd);
    auto r = matvec(m, v);
    REQUIRE(r->shape == std::vector<int>{3});
    for (int i = 0; i < 3; ++i) {
        double want = 0;
        for (int j = 0; j < 4; ++j) want += md[i * 4 + j] * vd[j];
        CHECK(r->data[i] == doctest::Approx(want).epsilon(1e-12));
    }
    CHECK_THROWS_AS(matvec(m, make_vector({1.0, 2.0})), DimensionError);
}

TEST_CASE("outer product is u_i v_j") {
    auto u = make_vector({1.0, 2.0});
    auto v = make_vector({3.0, 5.0, 7.0});
    auto o = outer(u, v);
    REQUIRE(o->shape == std::vector<int>{2, 3});
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(o->data[i * 3 + j] == u->data[i] * v->data[j]);
}

TEST_CASE("concat joins vectors in order") {
    auto r = concat({make_vector({1.0}), make_vector({2.0, 3.0}), make_vector({4.0})});
    CHECK(r->data == std::vector<double>{1, 2, 3, 4});
    CHECK_THROWS_AS(concat({make_tensor({1, 2, 3, 4}, {2, 2})}), DimensionError);
}

TEST_CASE("elementwise nonlinearities") {
    auto v = make_vector({-1.0, 0.0, 2.0});
    auto t = tanh_op(v);
    auto s = sigmoid_op(v);
    auto r = relu_op(v);
    for (int i = 0; i < 3; ++i) {
        CHECK(t->data[i] == doctest::Approx(std::tanh(v->data[i])));
        CHECK(s->data[i] == doctest::Approx(1.0 / (1.0 + std::exp(-v->data[i]))));
        CHECK(r->data[i] == std::max(0.0, v->data[i]));
    }
}

TEST_CASE("vmax takes the pointwise maximum and ties favor the first input") {
    auto a = make_vector({1.0, 5.0, 2.0}, true);
    auto b = make_vector({3.0, 5.0, 0.0}, true);
    auto m = vmax(a, b);
    CHECK(m->data == std::vector<double>{3, 5, 2});
    backward(sum(m));
    CHECK(a->grad == std::vector<double>{0, 1, 1});
    CHECK(b->grad == std::vector<double>{1, 0, 0});
}

TEST_CASE("dot and sum") {
    auto a = make_vector({1.0, 2.0, 3.0});
    auto b = make_vector({4.0, -5.0, 6.0});
    CHECK(dot(a, b)->value() == doctest::Approx(1 * 4 - 2 * 5 + 3 * 6));
    CHECK(sum(a)->value() == doctest::Approx(6.0));
}

TEST_CASE("layernorm standardizes then scales and shifts") {
    auto x = make_vector({1.0, 2.0, 3.0, 4.0});
    auto gamma = make_vector({1.0, 1.0, 1.0, 1.0});
    auto beta = make_vector({0.0, 0.0, 0.0, 0.0});
    auto y = layernorm(x, gamma, beta);
    double mean = 0, var = 0;
    for (double v : y->data) mean += v;
    mean /= 4;
    for (double v : y->data) var += (v - mean) * (v - mean);
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(var / 4 == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(y->data[0] < y->data[3]);
    CHECK_THROWS_AS(layernorm(make_vector({1.0}), make_vector({1.0}), make_vector({0.0})),
                    DimensionError);
}

TEST_CASE("softmax cross-entropy of uniform logits over 9 classes is ln 9") {
    auto logits = make_vector(std::vector<double>(9, 0.37));
    for (int gold = 0; gold < 9; ++gold) {
        CHECK(softmax_xent(logits, gold)->value() == doctest::Approx(std::log(9.0)));
    }
    CHECK_THROWS_AS(softmax_xent(logits, 9), IndexError);
    CHECK_THROWS_AS(softmax_xent(logits, -1), IndexError);
}

TEST_CASE("softmax cross-entropy is shift invariant and handles huge logits") {
    auto a = make_vector({1.0, 2.0, 3.0});
    auto b = make_vector({1001.0, 1002.0, 1003.0});
    CHECK(softmax_xent(a, 1)->value() == doctest::Approx(softmax_xent(b, 1)->value()));
    CHECK(std::isfinite(softmax_xent(b, 0)->value()));
}

TEST_CASE("backward: dot gradient is the other operand") {
    auto a = make_vector({1.0, 2.0, 3.0}, true);
    auto b = make_vector({4.0, 5.0, 6.0}, true);
    backward(dot(a, b));
    CHECK(a->grad == b->data);
    CHECK(b->grad == a->data);
}

TEST_CASE("gradients accumulate across backward calls until zero_grad") {
    auto a = make_vector({2.0, 3.0}, true);
    backward(sum(a));
    backward(sum(a));
    CHECK(a->grad == std::vector<double>{2, 2});
    a->zero_grad();
    CHECK(a->grad == std::vector<double>{0, 0});
}

TEST_CASE("no tape is recorded without requires_grad") {
    auto a = make_vector({1.0, 2.0});
    auto b = make_vector({3.0, 4.0});
    auto r = add(mul(a, b), a);
    CHECK(r->inputs.empty());
    CHECK(r->op == OpKind::Add);
}

TEST_CASE("grad_check passes on a composite expression") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    std::vector<double> xd(6);
    for (auto& v : xd) v = u(rng);
    auto x = make_vector(xd, true);
    auto f = [](const Tensor& t) {
        auto g = make_vector({1.1, 0.9, 1.0, 1.2, 0.8, 1.05});
        auto b = make_vector({0.1, -0.1, 0.0, 0.2, -0.2, 0.05});
        return dot(layernorm(tanh_op(t), g, b), sigmoid_op(t));
    };
    auto report = grad_check(f, x);
    CHECK(report.pass);
    CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("matvec pulls gradients into both matrix and vector") {
    auto m = make_tensor({1.0, 2.0, 3.0, 4.0}, {2, 2}, true);
    auto v = make_vector({5.0, 6.0}, true);
    auto probe = make_vector({1.0, 1.0});
    backward(dot(matvec(m, v), probe));
    CHECK(m->grad == std::vector<double>{5, 6, 5, 6});
    CHECK(v->grad == std::vector<double>{1 + 3, 2 + 4});
}
