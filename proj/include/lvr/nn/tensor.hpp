#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lvr::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

template <typename T>
struct TensorNode {
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad; // allocated on first use
    bool requires_grad = false;

    T* grad_data() {
        if (grad.empty())
            grad.assign(value.size(), T(0));
        return grad.data();
    }
};

/// Shared handle to a dense NCHW (or 2D/1D) array with an optional gradient.
/// Copies alias the same storage; use clone() for a deep copy.
template <typename T>
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, bool requires_grad = false);
    Tensor(Shape shape, std::vector<T> values, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t size() const { return node_->value.size(); }

    std::span<T> data() { return node_->value; }
    std::span<const T> data() const { return node_->value; }
    /// Gradient storage, allocated zeroed on first access. Shared by all
    /// handles to the same tensor, hence mutable through a const handle.
    std::span<T> grad() const {
        node_->grad_data();
        return node_->grad;
    }
    bool has_grad() const { return !node_->grad.empty(); }
    void zero_grad() const { node_->grad.assign(node_->value.size(), T(0)); }

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool on) { node_->requires_grad = on; }

    /// Value of a single-element tensor.
    T item() const;
    /// Deep copy of the values, detached from any graph.
    Tensor clone() const;

    TensorNode<T>* node() const { return node_.get(); }
    const std::shared_ptr<TensorNode<T>>& shared() const { return node_; }

private:
    std::shared_ptr<TensorNode<T>> node_;
};

/// Record of executed primitives. Each entry propagates the gradient of its
/// output into its inputs; backward replays them in reverse order.
template <typename T>
class Tape {
public:
    explicit Tape(bool recording = true) : recording_(recording) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    bool recording() const { return recording_; }
    std::size_t size() const { return ops_.size(); }
    void record(std::function<void()> vjp) { ops_.push_back(std::move(vjp)); }
    void clear() { ops_.clear(); }

    /// Seeds d(loss)/d(loss) = 1 and accumulates gradients into every
    /// tensor that requires them. Consumes the recorded ops.
    void backward(const Tensor<T>& loss);

private:
    bool recording_;
    std::vector<std::function<void()>> ops_;
};

/// Whether an op producing `out` from inputs needs to be recorded.
template <typename T>
bool should_record(const Tape<T>& tape, std::initializer_list<const Tensor<T>*> inputs) {
    if (!tape.recording())
        return false;
    for (const auto* in : inputs)
        if (in != nullptr && in->defined() && in->requires_grad())
            return true;
    return false;
}

template <typename T>
struct Parameter {
    std::string name;
    Tensor<T> tensor;
};

/// Ordered, uniquely named parameter collection.
template <typename T>
class ParameterSet {
public:
    Tensor<T>& add(const std::string& name, Shape shape);
    const Tensor<T>& get(const std::string& name) const;
    Tensor<T>& get(const std::string& name);
    bool contains(const std::string& name) const;

    std::span<Parameter<T>> items() { return params_; }
    std::span<const Parameter<T>> items() const { return params_; }
    std::size_t size() const { return params_.size(); }
    /// Total scalar count.
    std::size_t count() const;
    void zero_grad();

private:
    std::vector<Parameter<T>> params_;
};

} // namespace lvr::nn
