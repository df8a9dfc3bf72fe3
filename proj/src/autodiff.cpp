#include "rgi/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace rgi {

namespace {

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
}

NodePtr make_node(Tensor value, std::vector<NodePtr> parents,
                  std::function<void(Node&)> backprop) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->parents = std::move(parents);
    for (const NodePtr& p : n->parents) n->requires_grad = n->requires_grad || p->requires_grad;
    if (n->requires_grad) n->backprop = std::move(backprop);
    return n;
}

}  // namespace

NodePtr leaf(Tensor value, bool trainable) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->requires_grad = trainable;
    return n;
}

NodePtr constant(Tensor value) { return leaf(std::move(value), false); }

NodePtr add(const NodePtr& a, const NodePtr& b) {
    check_same_shape("add", a->value, b->value);
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b->value[i];
    return make_node(std::move(out), {a, b}, [](Node& self) {
        for (int k = 0; k < 2; ++k) {
            Node& p = *self.parents[k];
            if (!p.requires_grad) continue;
            for (std::size_t i = 0; i < p.grad.numel(); ++i) p.grad[i] += self.grad[i];
        }
    });
}

NodePtr sub(const NodePtr& a, const NodePtr& b) {
    check_same_shape("sub", a->value, b->value);
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= b->value[i];
    return make_node(std::move(out), {a, b}, [](Node& self) {
        Node& pa = *self.parents[0];
        Node& pb = *self.parents[1];
        if (pa.requires_grad)
            for (std::size_t i = 0; i < pa.grad.numel(); ++i) pa.grad[i] += self.grad[i];
        if (pb.requires_grad)
            for (std::size_t i = 0; i < pb.grad.numel(); ++i) pb.grad[i] -= self.grad[i];
    });
}

NodePtr mul_elementwise(const NodePtr& a, const NodePtr& b) {
    check_same_shape("mul_elementwise", a->value, b->value);
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b->value[i];
    return make_node(std::move(out), {a, b}, [](Node& self) {
        Node& pa = *self.parents[0];
        Node& pb = *self.parents[1];
        if (pa.requires_grad)
            for (std::size_t i = 0; i < pa.grad.numel(); ++i)
                pa.grad[i] += self.grad[i] * pb.value[i];
        if (pb.requires_grad)
            for (std::size_t i = 0; i < pb.grad.numel(); ++i)
                pb.grad[i] += self.grad[i] * pa.value[i];
    });
}

NodePtr matmul(const NodePtr& a, const NodePtr& b) {
    const Tensor& av = a->value;
    const Tensor& bv = b->value;
    if (av.rank() != 2 || (bv.rank() != 2 && bv.rank() != 1)) {
        throw std::invalid_argument("matmul: expected {m,k} x {k,n} or {m,k} x {k}, got " +
                                    shape_str(av.shape()) + " vs " + shape_str(bv.shape()));
    }
    const std::size_t m = av.shape()[0];
    const std::size_t k = av.shape()[1];
    if (bv.shape()[0] != k) {
        throw std::invalid_argument("matmul: inner dimensions differ, " +
                                    shape_str(av.shape()) + " vs " + shape_str(bv.shape()));
    }

    if (bv.rank() == 1) {
        Tensor out({m});
        for (std::size_t i = 0; i < m; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < k; ++j) acc += av[i * k + j] * bv[j];
            out[i] = acc;
        }
        return make_node(std::move(out), {a, b}, [m, k](Node& self) {
            Node& pa = *self.parents[0];
            Node& pb = *self.parents[1];
            if (pa.requires_grad) {
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < k; ++j)
                        pa.grad[i * k + j] += self.grad[i] * pb.value[j];
            }
            if (pb.requires_grad) {
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < k; ++j)
                        pb.grad[j] += self.grad[i] * pa.value[i * k + j];
            }
        });
    }

    const std::size_t n = bv.shape()[1];
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            double aij = av[i * k + j];
            for (std::size_t c = 0; c < n; ++c) out[i * n + c] += aij * bv[j * n + c];
        }
    return make_node(std::move(out), {a, b}, [m, k, n](Node& self) {
        Node& pa = *self.parents[0];
        Node& pb = *self.parents[1];
        if (pa.requires_grad) {
            // dA = dY B^T
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < k; ++j) {
                    double acc = 0.0;
                    for (std::size_t c = 0; c < n; ++c)
                        acc += self.grad[i * n + c] * pb.value[j * n + c];
                    pa.grad[i * k + j] += acc;
                }
        }
        if (pb.requires_grad) {
            // dB = A^T dY
            for (std::size_t j = 0; j < k; ++j)
                for (std::size_t c = 0; c < n; ++c) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < m; ++i)
                        acc += pa.value[i * k + j] * self.grad[i * n + c];
                    pb.grad[j * n + c] += acc;
                }
        }
    });
}

NodePtr scalar_mul(double c, const NodePtr& a) {
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= c;
    return make_node(std::move(out), {a}, [c](Node& self) {
        Node& p = *self.parents[0];
        if (!p.requires_grad) return;
        for (std::size_t i = 0; i < p.grad.numel(); ++i) p.grad[i] += c * self.grad[i];
    });
}

NodePtr tanh(const NodePtr& a) {
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(out[i]);
    return make_node(std::move(out), {a}, [](Node& self) {
        Node& p = *self.parents[0];
        if (!p.requires_grad) return;
        for (std::size_t i = 0; i < p.grad.numel(); ++i) {
            double t = self.value[i];
            p.grad[i] += self.grad[i] * (1.0 - t * t);
        }
    });
}

NodePtr leaky_relu(const NodePtr& a, double slope) {
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.numel(); ++i)
        if (out[i] < 0.0) out[i] *= slope;
    return make_node(std::move(out), {a}, [slope](Node& self) {
        Node& p = *self.parents[0];
        if (!p.requires_grad) return;
        for (std::size_t i = 0; i < p.grad.numel(); ++i)
            p.grad[i] += self.grad[i] * (p.value[i] > 0.0 ? 1.0 : slope);
    });
}

NodePtr sum(const NodePtr& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a->value.numel(); ++i) acc += a->value[i];
    return make_node(Tensor::scalar(acc), {a}, [](Node& self) {
        Node& p = *self.parents[0];
        if (!p.requires_grad) return;
        double g = self.grad[0];
        for (std::size_t i = 0; i < p.grad.numel(); ++i) p.grad[i] += g;
    });
}

NodePtr sum_squares(const NodePtr& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a->value.numel(); ++i) acc += a->value[i] * a->value[i];
    return make_node(Tensor::scalar(acc), {a}, [](Node& self) {
        Node& p = *self.parents[0];
        if (!p.requires_grad) return;
        double g = self.grad[0];
        for (std::size_t i = 0; i < p.grad.numel(); ++i) p.grad[i] += 2.0 * g * p.value[i];
    });
}

NodePtr abs_sum(const NodePtr& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a->value.numel(); ++i) acc += std::abs(a->value[i]);
    return make_node(Tensor::scalar(acc), {a}, [](Node& self) {
        Node& p = *self.parents[0];
        if (!p.requires_grad) return;
        double g = self.grad[0];
        // subgradient 0 at the kink
        for (std::size_t i = 0; i < p.grad.numel(); ++i) {
            double v = p.value[i];
            p.grad[i] += g * (v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
        }
    });
}

NodePtr reshape(const NodePtr& a, Shape shape) {
    if (shape_numel(shape) != a->value.numel()) {
        throw std::invalid_argument("reshape: " + shape_str(a->value.shape()) + " has " +
                                    std::to_string(a->value.numel()) + " elements, target " +
                                    shape_str(shape) + " has " + std::to_string(shape_numel(shape)));
    }
    Tensor out(std::move(shape), a->value.values());
    return make_node(std::move(out), {a}, [](Node& self) {
        Node& p = *self.parents[0];
        if (!p.requires_grad) return;
        for (std::size_t i = 0; i < p.grad.numel(); ++i) p.grad[i] += self.grad[i];
    });
}

NodePtr clamp(const NodePtr& a, double lo, double hi) {
    if (!(lo <= hi)) throw std::invalid_argument("clamp: lo > hi");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.numel(); ++i) {
        if (out[i] < lo) out[i] = lo;
        else if (out[i] > hi) out[i] = hi;
    }
    return make_node(std::move(out), {a}, [lo, hi](Node& self) {
        Node& p = *self.parents[0];
        if (!p.requires_grad) return;
        for (std::size_t i = 0; i < p.grad.numel(); ++i) {
            double v = p.value[i];
            if (v >= lo && v <= hi) p.grad[i] += self.grad[i];
        }
    });
}

void backward(const NodePtr& root) {
    if (!root) throw std::invalid_argument("backward: null root");
    if (root->value.numel() != 1) {
        throw std::invalid_argument("backward: root must be scalar, got shape " +
                                    shape_str(root->value.shape()));
    }

    // iterative post-order DFS
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(root.get(), 0);
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* p = node->parents[next++].get();
            if (seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    for (Node* n : order) n->grad = Tensor(n->value.shape());
    root->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backprop && n->requires_grad) n->backprop(*n);
    }
}

Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f,
                                  const Tensor& at, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("finite_difference_gradient: step must be > 0");
    Tensor grad(at.shape());
    Tensor probe = at;
    for (std::size_t i = 0; i < at.numel(); ++i) {
        double orig = probe[i];
        probe[i] = orig + step;
        double hi = f(probe);
        probe[i] = orig - step;
        double lo = f(probe);
        probe[i] = orig;
        grad[i] = (hi - lo) / (2.0 * step);
    }
    return grad;
}

}  // namespace rgi
