#pragma once

// Minimal reverse-mode autodiff: a Tensor is a shared handle to a node that
// owns its values, an optional gradient buffer and, for op outputs, the
// closure that pushes its gradient into its parents.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mrf::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad; // empty until first accumulation
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    // Returns the gradient buffer, allocating zeros on first use.
    std::vector<double>& grad_buffer();
};

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);

    bool defined() const { return static_cast<bool>(node_); }
    const Shape& shape() const { return node_->shape; }
    std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t numel() const { return node_->value.size(); }

    std::span<double> values() { return node_->value; }
    std::span<const double> values() const { return node_->value; }
    double item() const;

    bool requires_grad() const { return node_->requires_grad; }
    bool has_grad() const { return !node_->grad.empty(); }
    // Gradient view; all zeros when nothing has been accumulated yet.
    std::span<const double> grad() const;
    void zero_grad();

    // Whether this tensor was produced by an op that recorded a backward step.
    bool recorded() const { return static_cast<bool>(node_->backward_fn); }

    Node& node() const { return *node_; }
    const std::shared_ptr<Node>& node_ptr() const { return node_; }

private:
    std::shared_ptr<Node> node_;
};

// Disables graph recording on this thread while alive (inference paths).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

bool grad_enabled();

// Builds an op output; the backward closure is only kept when some input needs a gradient.
Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward_fn);

// Propagates d(loss)/d(.) into every reachable tensor with requires_grad.
// loss must be a single-element tensor produced by a recorded computation.
void backward(const Tensor& loss);

} // namespace mrf::ad
