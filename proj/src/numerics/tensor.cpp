#include "numerics/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "error.hpp"

namespace dgp {

namespace {
thread_local bool g_grad_enabled = true;

void check_shape(const Shape& shape) {
    if (shape.empty()) fail(ErrorCode::Shape, "empty shape");
    for (int d : shape) {
        if (d < 1) fail(ErrorCode::Shape, "empty shape: dimension " + std::to_string(d) + " in " + shape_str(shape));
    }
}

void check_finite(std::span<const float> values) {
    for (float v : values) {
        if (!std::isfinite(v)) fail(ErrorCode::Numeric, "non-finite value produced");
    }
}
}  // namespace

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ']';
    return os.str();
}

std::vector<float>& detail::Node::ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0f);
    return grad;
}

Tensor::Tensor() : node_(std::make_shared<detail::Node>()) {
    node_->shape = {1};
    node_->data = {0.0f};
}

Tensor::Tensor(Shape shape, std::vector<float> data, bool requires_grad) : node_(std::make_shared<detail::Node>()) {
    check_shape(shape);
    if (shape_numel(shape) != data.size()) {
        fail(ErrorCode::Shape, "data length " + std::to_string(data.size()) + " does not match shape " + shape_str(shape));
    }
    check_finite(data);
    node_->shape = std::move(shape);
    node_->data = std::move(data);
    node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    check_shape(shape);
    const auto n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<float>(n, 0.0f), requires_grad);
}

Tensor Tensor::full(Shape shape, float value) {
    check_shape(shape);
    const auto n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<float>(n, value));
}

std::span<float> Tensor::mutable_data() {
    if (!node_->is_leaf()) fail(ErrorCode::InvalidArgument, "cannot mutate a non-leaf tensor");
    return node_->data;
}

float Tensor::item() const {
    if (numel() != 1) fail(ErrorCode::Shape, "item() on tensor of shape " + shape_str(shape()));
    return node_->data[0];
}

Tensor Tensor::grad() const {
    if (node_->grad.size() != node_->data.size()) return Tensor::zeros(shape());
    return Tensor(shape(), node_->grad);
}

void Tensor::zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0f); }

Tensor Tensor::detach() const { return Tensor(shape(), node_->data); }

Tensor make_result(Shape shape, std::vector<float> data, std::vector<Tensor> inputs,
                   std::function<void(detail::Node&)> backward_fn) {
    check_finite(data);
    auto node = std::make_shared<detail::Node>();
    node->shape = std::move(shape);
    node->data = std::move(data);
    if (g_grad_enabled) {
        const bool needs = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
        if (needs) {
            node->requires_grad = true;
            for (auto& t : inputs) node->parents.push_back(t.node());
            node->backward_fn = std::move(backward_fn);
        }
    }
    return Tensor(std::move(node));
}

void backward(const Tensor& loss) {
    if (loss.numel() != 1) fail(ErrorCode::Shape, "backward() needs a scalar loss, got shape " + shape_str(loss.shape()));
    if (!loss.requires_grad()) return;

    // Iterative post-order DFS gives a topological order.
    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> seen;
    std::vector<std::pair<detail::Node*, std::size_t>> stack{{loss.node().get(), 0}};
    seen.insert(loss.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            detail::Node* parent = node->parents[next++].get();
            if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    for (detail::Node* node : order) {
        if (!node->is_leaf()) node->grad.assign(node->data.size(), 0.0f);
    }
    loss.node()->ensure_grad()[0] += 1.0f;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node* node = *it;
        if (!node->is_leaf()) node->backward_fn(*node);
    }
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

}  // namespace dgp
