#include "lvr/nn/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "lvr/errors.hpp"

namespace lvr::nn {

std::size_t shape_size(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape)
        n *= d;
    return n;
}

std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i)
        os << (i ? ", " : "") << shape[i];
    os << ')';
    return os.str();
}

template <typename T>
Tensor<T>::Tensor(Shape shape, bool requires_grad) : node_(std::make_shared<TensorNode<T>>()) {
    node_->value.assign(shape_size(shape), T(0));
    node_->shape = std::move(shape);
    node_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values, bool requires_grad)
    : node_(std::make_shared<TensorNode<T>>()) {
    if (values.size() != shape_size(shape))
        throw ConfigError("tensor values do not match shape " + shape_string(shape));
    node_->shape = std::move(shape);
    node_->value = std::move(values);
    node_->requires_grad = requires_grad;
}

template <typename T>
T Tensor<T>::item() const {
    if (size() != 1)
        throw ConfigError("item() on tensor of shape " + shape_string(shape()));
    return node_->value[0];
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
    return Tensor<T>(shape(), node_->value, false);
}

template <typename T>
void Tape<T>::backward(const Tensor<T>& loss) {
    if (!loss.defined() || loss.size() != 1)
        throw ConfigError("backward needs a scalar loss");
    if (!loss.requires_grad())
        throw ConfigError("loss does not depend on any parameter");
    loss.node()->grad_data()[0] += T(1);
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it)
        (*it)();
    ops_.clear();
}

template <typename T>
Tensor<T>& ParameterSet<T>::add(const std::string& name, Shape shape) {
    if (contains(name))
        throw ConfigError("duplicate parameter name " + name);
    params_.push_back({name, Tensor<T>(std::move(shape), true)});
    return params_.back().tensor;
}

template <typename T>
bool ParameterSet<T>::contains(const std::string& name) const {
    return std::any_of(params_.begin(), params_.end(), [&](const auto& p) { return p.name == name; });
}

template <typename T>
const Tensor<T>& ParameterSet<T>::get(const std::string& name) const {
    for (const auto& p : params_)
        if (p.name == name)
            return p.tensor;
    throw ConfigError("no parameter named " + name);
}

template <typename T>
Tensor<T>& ParameterSet<T>::get(const std::string& name) {
    for (auto& p : params_)
        if (p.name == name)
            return p.tensor;
    throw ConfigError("no parameter named " + name);
}

template <typename T>
std::size_t ParameterSet<T>::count() const {
    std::size_t n = 0;
    for (const auto& p : params_)
        n += p.tensor.size();
    return n;
}

template <typename T>
void ParameterSet<T>::zero_grad() {
    for (auto& p : params_)
        p.tensor.zero_grad();
}

template class Tensor<float>;
template class Tensor<double>;
template class Tape<float>;
template class Tape<double>;
template class ParameterSet<float>;
template class ParameterSet<double>;

} // namespace lvr::nn
