#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "rgi/tensor.hpp"

namespace rgi {

// Reverse-mode autodiff over Tensor values. A graph is built per evaluation,
// confined to one thread, and consumed by a single backward() pass.
struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
    Tensor value;
    Tensor grad;  // allocated by backward(), same shape as value
    bool requires_grad = false;
    std::vector<NodePtr> parents;
    std::function<void(Node&)> backprop;  // accumulates self.grad into parents
};

NodePtr leaf(Tensor value, bool trainable = false);
NodePtr constant(Tensor value);

NodePtr add(const NodePtr& a, const NodePtr& b);
NodePtr sub(const NodePtr& a, const NodePtr& b);
NodePtr mul_elementwise(const NodePtr& a, const NodePtr& b);
// {m,k} x {k,n} -> {m,n} or {m,k} x {k} -> {m}
NodePtr matmul(const NodePtr& a, const NodePtr& b);
NodePtr scalar_mul(double c, const NodePtr& a);
NodePtr tanh(const NodePtr& a);
NodePtr leaky_relu(const NodePtr& a, double slope);
NodePtr sum(const NodePtr& a);
NodePtr sum_squares(const NodePtr& a);
NodePtr abs_sum(const NodePtr& a);
NodePtr reshape(const NodePtr& a, Shape shape);
// gradient passes through on [lo, hi] (endpoints included), zero outside
NodePtr clamp(const NodePtr& a, double lo, double hi);

// Populates grad for every node reachable from a scalar root; gradients
// accumulate across shared sub-expressions. Leaves not flagged trainable end
// with all-zero gradients.
void backward(const NodePtr& root);

// Central-difference gradient of a scalar function, the test oracle for
// every backward rule.
Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f,
                                  const Tensor& at, double step);

}  // namespace rgi
