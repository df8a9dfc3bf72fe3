#include <doctest.h>

#include <cmath>
#include <functional>

#include "rgi/autodiff.hpp"
#include "rgi/rng.hpp"

using namespace rgi;

namespace {

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-8);
}

void check_grad_against_fd(const std::function<NodePtr(const NodePtr&)>& build, const Tensor& at,
                           double tol = 1e-4) {
    NodePtr x = leaf(at, true);
    NodePtr root = build(x);
    backward(root);

    Tensor fd = finite_difference_gradient(
        [&](const Tensor& probe) { return build(constant(probe))->value[0]; }, at, 1e-5);

    REQUIRE(x->grad.same_shape(fd));
    for (std::size_t i = 0; i < fd.numel(); ++i) {
        CAPTURE(i);
        CHECK(rel_err(x->grad[i], fd[i]) < tol);
    }
}

}  // namespace

TEST_CASE("backward of sum_squares at [1,2] gives [2,4]") {
    NodePtr v = leaf(Tensor({2}, {1.0, 2.0}), true);
    NodePtr root = sum_squares(v);
    backward(root);
    CHECK(v->grad[0] == doctest::Approx(2.0));
    CHECK(v->grad[1] == doctest::Approx(4.0));
}

TEST_CASE("backward of sum(a*a) at [1,-1] gives [2,-2]") {
    NodePtr a = leaf(Tensor({2}, {1.0, -1.0}), true);
    NodePtr root = sum(mul_elementwise(a, a));
    backward(root);
    CHECK(a->grad[0] == doctest::Approx(2.0));
    CHECK(a->grad[1] == doctest::Approx(-2.0));
}

TEST_CASE("constant leaves end with zero gradients") {
    NodePtr a = leaf(Tensor({3}, {1.0, 2.0, 3.0}), true);
    NodePtr c = constant(Tensor({3}, {4.0, 5.0, 6.0}));
    NodePtr root = sum(mul_elementwise(a, c));
    backward(root);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(c->grad[i] == 0.0);
        CHECK(a->grad[i] == doctest::Approx(c->value[i]));
    }
}

TEST_CASE("non-scalar root is rejected") {
    NodePtr a = leaf(Tensor({2}, {1.0, 2.0}), true);
    CHECK_THROWS_WITH_AS(backward(mul_elementwise(a, a)), doctest::Contains("scalar"),
                         std::invalid_argument);
}

TEST_CASE("finite differences oracle sanity") {
    Tensor at({2}, {1.0, 2.0});
    Tensor fd = finite_difference_gradient(
        [](const Tensor& t) { return t[0] * t[0] + t[1] * t[1]; }, at, 1e-5);
    CHECK(fd[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(fd[1] == doctest::Approx(4.0).epsilon(1e-6));

    Tensor zero = finite_difference_gradient([](const Tensor&) { return 3.5; }, at, 1e-5);
    CHECK(std::abs(zero[0]) < 1e-9);
    CHECK(std::abs(zero[1]) < 1e-9);

    CHECK_THROWS_AS(finite_difference_gradient([](const Tensor&) { return 0.0; }, at, 0.0),
                    std::invalid_argument);
}

TEST_CASE("matmul chain gradient matches finite differences") {
    Rng rng(42);
    Tensor a0 = rng.normal_tensor({3, 4});
    Tensor b0 = rng.normal_tensor({4, 2});
    Tensor v0 = rng.normal_tensor({2});

    // wrt the left matrix through a two-stage chain
    NodePtr a = leaf(a0, true);
    NodePtr root = sum_squares(matmul(matmul(a, constant(b0)), constant(v0)));
    backward(root);
    Tensor fd = finite_difference_gradient(
        [&](const Tensor& probe) {
            return sum_squares(matmul(matmul(constant(probe), constant(b0)), constant(v0)))->value[0];
        },
        a0, 1e-5);
    for (std::size_t i = 0; i < fd.numel(); ++i) CHECK(rel_err(a->grad[i], fd[i]) < 1e-4);

    // wrt the vector
    NodePtr v = leaf(v0, true);
    NodePtr root2 = sum_squares(matmul(constant(a0), matmul(constant(b0), v)));
    backward(root2);
    Tensor fd2 = finite_difference_gradient(
        [&](const Tensor& probe) {
            return sum_squares(matmul(constant(a0), matmul(constant(b0), constant(probe))))->value[0];
        },
        v0, 1e-5);
    for (std::size_t i = 0; i < fd2.numel(); ++i) CHECK(rel_err(v->grad[i], fd2[i]) < 1e-4);
}

TEST_CASE("every registered op matches finite differences on randomized inputs") {
    Rng rng(2024);
    // finite differences are blind at kinks and on flat regions, so the draws
    // stay clear of |x| ~ 0 (abs, leaky_relu) and of the clamp edges; the
    // deterministic cases above pin the kink behavior itself
    auto away_from_kinks = [&](double margin) {
        Tensor t = rng.normal_tensor({3, 3});
        for (std::size_t i = 0; i < t.numel(); ++i) {
            if (std::abs(t[i]) < margin) t[i] = t[i] < 0.0 ? t[i] - margin : t[i] + margin;
        }
        return t;
    };
    for (int trial = 0; trial < 50; ++trial) {
        Tensor at = away_from_kinks(1e-3);
        Tensor other = rng.normal_tensor({3, 3});
        Tensor vec = rng.normal_tensor({3});
        Tensor inside = rng.normal_tensor({3, 3}, 0.0, 0.15);  // interior of the clamp box
        for (std::size_t i = 0; i < inside.numel(); ++i) {
            if (inside[i] > 0.4) inside[i] = 0.4;
            if (inside[i] < -0.4) inside[i] = -0.4;
            if (std::abs(inside[i]) < 1e-3) inside[i] += 2e-3;
        }
        int which = trial % 10;
        auto build = [&](const NodePtr& x) -> NodePtr {
            switch (which) {
                case 0: return sum_squares(add(x, constant(other)));
                case 1: return sum_squares(sub(x, constant(other)));
                case 2: return sum_squares(mul_elementwise(x, constant(other)));
                case 3: return sum_squares(matmul(x, constant(vec)));
                case 4: return sum_squares(scalar_mul(-1.7, x));
                case 5: return sum(tanh(x));
                case 6: return sum_squares(leaky_relu(x, 0.2));
                case 7: return abs_sum(reshape(x, {9}));
                case 8: return sum_squares(clamp(x, -0.5, 0.5));
                default: return scalar_mul(0.5, add(sum_squares(x), abs_sum(x)));
            }
        };
        check_grad_against_fd(build, which == 8 ? inside : at);
    }
}

TEST_CASE("gradient accumulation is linear over subgraph sums") {
    Rng rng(9);
    Tensor at = rng.normal_tensor({4});

    auto f1 = [](const NodePtr& x) { return sum_squares(x); };
    auto f2 = [](const NodePtr& x) { return sum(tanh(x)); };

    NodePtr x_joint = leaf(at, true);
    backward(add(f1(x_joint), f2(x_joint)));

    NodePtr x1 = leaf(at, true);
    backward(f1(x1));
    NodePtr x2 = leaf(at, true);
    backward(f2(x2));

    for (std::size_t i = 0; i < at.numel(); ++i) {
        CHECK(x_joint->grad[i] == doctest::Approx(x1->grad[i] + x2->grad[i]).epsilon(1e-12));
    }
}

TEST_CASE("shared sub-expressions accumulate, repeated backward stays consistent") {
    NodePtr x = leaf(Tensor({2}, {1.5, -2.0}), true);
    NodePtr shared = mul_elementwise(x, x);
    NodePtr root = add(sum(shared), sum(shared));
    backward(root);
    // d/dx 2*sum(x^2) = 4x
    CHECK(x->grad[0] == doctest::Approx(6.0));
    CHECK(x->grad[1] == doctest::Approx(-8.0));

    backward(root);  // grads are rebuilt, not doubled
    CHECK(x->grad[0] == doctest::Approx(6.0));
}

TEST_CASE("clamp gradient is zero outside the interval, pass-through inside") {
    NodePtr x = leaf(Tensor({3}, {-2.0, 0.3, 2.0}), true);
    backward(sum(clamp(x, -1.0, 1.0)));
    CHECK(x->grad[0] == 0.0);
    CHECK(x->grad[1] == 1.0);
    CHECK(x->grad[2] == 0.0);
}
