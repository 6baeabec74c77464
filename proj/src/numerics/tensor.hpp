#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dgp {

using Shape = std::vector<int>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {
struct Node {
    Shape shape;
    std::vector<float> data;
    std::vector<float> grad;  // empty until something flows into it
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    // Reads this->grad and accumulates into the parents' grads.
    std::function<void(Node&)> backward_fn;

    bool is_leaf() const { return !backward_fn; }
    std::vector<float>& ensure_grad();
};
}  // namespace detail

// Row-major float32 array with optional reverse-mode gradient tracking.
// Copies share storage; results of operations are fresh tensors.
class Tensor {
public:
    Tensor();
    Tensor(Shape shape, std::vector<float> data, bool requires_grad = false);

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, float value);

    const Shape& shape() const { return node_->shape; }
    int dim(std::size_t i) const { return node_->shape.at(i); }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t numel() const { return node_->data.size(); }

    std::span<const float> data() const { return node_->data; }
    // Only for leaves: parameter initialization and optimizer updates.
    std::span<float> mutable_data();
    float item() const;
    float at(std::size_t i) const { return node_->data.at(i); }

    bool requires_grad() const { return node_->requires_grad; }
    // Gradient as a plain tensor; zeros when nothing has reached this tensor.
    Tensor grad() const;
    std::span<const float> grad_data() const { return node_->grad; }
    void zero_grad();

    // Same values, no graph history.
    Tensor detach() const;

    const std::shared_ptr<detail::Node>& node() const { return node_; }

private:
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
    friend Tensor make_result(Shape, std::vector<float>, std::vector<Tensor>, std::function<void(detail::Node&)>);

    std::shared_ptr<detail::Node> node_;
};

// Builds an operation output. The backward closure is attached only when some
// input requires grad and grad mode is enabled.
Tensor make_result(Shape shape, std::vector<float> data, std::vector<Tensor> inputs,
                   std::function<void(detail::Node&)> backward_fn);

// Populates gradients of every leaf reachable from `loss` (a one-element
// tensor). Leaf gradients accumulate across calls; intermediate ones do not.
void backward(const Tensor& loss);

bool grad_enabled();

// Disables graph construction in scope (inference paths).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

}  // namespace dgp
