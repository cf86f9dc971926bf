#include "mrf/tensor.hpp"

#include <sstream>
#include <unordered_set>

#include "mrf/error.hpp"

namespace mrf::ad {

namespace {
thread_local bool g_grad_enabled = true;
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream ss;
    ss << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) ss << (i ? "," : "") << shape[i];
    ss << ')';
    return ss.str();
}

std::vector<double>& Node::grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    const std::size_t n = shape_numel(shape);
    return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
    if (shape_numel(shape) != values.size())
        throw ArgumentError("tensor: " + std::to_string(values.size()) + " values for shape " + shape_str(shape));
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->value = std::move(values);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

double Tensor::item() const {
    if (numel() != 1) throw ArgumentError("tensor: item() on shape " + shape_str(shape()));
    return node_->value[0];
}

std::span<const double> Tensor::grad() const { return node_->grad_buffer(); }

void Tensor::zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }

Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward_fn) {
    Tensor out = Tensor::from(std::move(shape), std::move(values));
    bool needs = false;
    if (!g_grad_enabled) return out;
    for (const Tensor& t : inputs) needs |= t.requires_grad();
    if (needs) {
        Node& n = out.node();
        n.requires_grad = true;
        for (Tensor& t : inputs) n.parents.push_back(t.node_ptr());
        n.backward_fn = std::move(backward_fn);
    }
    return out;
}

void backward(const Tensor& loss) {
    if (!loss.defined()) throw UsageError("backward: undefined tensor");
    if (loss.numel() != 1) throw UsageError("backward: loss must be a scalar, got " + shape_str(loss.shape()));
    if (!loss.recorded())
        throw UsageError("backward: tensor was not produced by a recorded computation");

    // Iterative post-order DFS gives a topological order (parents before children).
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack{{&loss.node(), 0}};
    visited.insert(&loss.node());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* p = node->parents[next++].get();
            if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    // Intermediate gradients start from zero on every call; leaves accumulate.
    for (Node* n : order)
        if (n->backward_fn) n->grad.assign(n->value.size(), 0.0);
    loss.node().grad_buffer()[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backward_fn) (*it)->backward_fn(**it);
}

} // namespace mrf::ad
