//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "molrange/error.hpp"

namespace molrange::nn {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape &shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t { 1 },
                         std::multiplies<> {});
}

inline std::string shape_str(const Shape &shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0)
      s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

[[noreturn]] inline void shape_error(const std::string &op, const Shape &a,
                                     const Shape &b) {
  throw Error(ErrorKind::kShapeMismatch,
              op + ": " + shape_str(a) + " vs " + shape_str(b));
}

/// Thread-local switch for graph recording.
class GradMode {
public:
  static bool enabled() { return flag(); }
  static void set(bool on) { flag() = on; }

private:
  static bool &flag() {
    thread_local bool on = true;
    return on;
  }
};

class NoGradGuard {
public:
  NoGradGuard(): prev_(GradMode::enabled()) { GradMode::set(false); }
  ~NoGradGuard() { GradMode::set(prev_); }
  NoGradGuard(const NoGradGuard &) = delete;
  NoGradGuard &operator=(const NoGradGuard &) = delete;

private:
  bool prev_;
};

template <class T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // empty until a gradient reaches this node
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads self.grad and accumulates into parents' grads.
  std::function<void(Node &)> backward_fn;

  bool is_leaf() const { return !backward_fn; }

  std::vector<T> &ensure_grad() {
    if (grad.size() != value.size())
      grad.assign(value.size(), T(0));
    return grad;
  }
};

template <class T>
class Tensor {
public:
  using value_type = T;
  using NodePtr = std::shared_ptr<Node<T>>;

  Tensor() = default;
  explicit Tensor(NodePtr node): node_(std::move(node)) { }

  static Tensor from(Shape shape, std::vector<T> values,
                     bool requires_grad = false) {
    if (values.size() != nn::numel(shape))
      throw Error(ErrorKind::kShapeMismatch,
                  "data length " + std::to_string(values.size())
                      + " does not match shape " + shape_str(shape));
    auto node = std::make_shared<Node<T>>();
    node->shape = std::move(shape);
    node->value = std::move(values);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
  }

  static Tensor full(Shape shape, T fill, bool requires_grad = false) {
    std::vector<T> v(nn::numel(shape), fill);
    return from(std::move(shape), std::move(v), requires_grad);
  }
  static Tensor zeros(Shape shape, bool requires_grad = false) {
    return full(std::move(shape), T(0), requires_grad);
  }
  static Tensor scalar(T v, bool requires_grad = false) {
    return from({}, { v }, requires_grad);
  }

  bool defined() const { return static_cast<bool>(node_); }
  const Shape &shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->value.size(); }
  std::size_t dim(int axis) const { return node_->shape[normalize_axis(axis)]; }

  std::size_t normalize_axis(int axis) const {
    const int r = static_cast<int>(rank());
    const int a = axis < 0 ? axis + r : axis;
    if (a < 0 || a >= r)
      throw Error(ErrorKind::kShapeMismatch,
                  "axis " + std::to_string(axis) + " out of range for "
                      + shape_str(shape()));
    return static_cast<std::size_t>(a);
  }

  std::span<T> data() { return node_->value; }
  std::span<const T> data() const { return node_->value; }
  std::vector<T> &values() { return node_->value; }
  const std::vector<T> &values() const { return node_->value; }
  T item() const {
    if (numel() != 1)
      throw Error(ErrorKind::kNotScalar, "item() on " + shape_str(shape()));
    return node_->value[0];
  }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }

  bool has_grad() const { return node_->grad.size() == node_->value.size(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() { return node_->ensure_grad(); }
  void zero_grad() {
    if (has_grad())
      std::fill(node_->grad.begin(), node_->grad.end(), T(0));
  }
  void drop_grad() { node_->grad.clear(); }

  /// Same values, no history.
  Tensor detach() const {
    return from(shape(), values(), false);
  }

  /// Reverse-mode sweep from this scalar. Leaf gradients accumulate across
  /// calls; interior gradients are reset each call.
  void backward() const;

  Node<T> *node() const { return node_.get(); }
  const NodePtr &node_ptr() const { return node_; }

private:
  NodePtr node_;
};

/// Creates an op result. When recording is on and any input tracks
/// gradients, the result keeps its inputs and the backward closure.
template <class T>
Tensor<T> make_result(Shape shape, std::vector<T> value,
                      std::initializer_list<Tensor<T>> inputs,
                      std::function<void(Node<T> &)> backward_fn) {
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (GradMode::enabled()) {
    bool any = false;
    for (const Tensor<T> &t: inputs)
      any = any || (t.defined() && t.requires_grad());
    if (any) {
      node->requires_grad = true;
      for (const Tensor<T> &t: inputs)
        node->parents.push_back(t.node_ptr());
      node->backward_fn = std::move(backward_fn);
    }
  }
  return Tensor<T>(std::move(node));
}

template <class T>
Tensor<T> make_result(Shape shape, std::vector<T> value,
                      const std::vector<Tensor<T>> &inputs,
                      std::function<void(Node<T> &)> backward_fn) {
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (GradMode::enabled()) {
    bool any = std::any_of(inputs.begin(), inputs.end(), [](const Tensor<T> &t) {
      return t.defined() && t.requires_grad();
    });
    if (any) {
      node->requires_grad = true;
      for (const Tensor<T> &t: inputs)
        node->parents.push_back(t.node_ptr());
      node->backward_fn = std::move(backward_fn);
    }
  }
  return Tensor<T>(std::move(node));
}

/// Parent gradient buffer if that parent participates, else nullptr.
template <class T>
std::vector<T> *parent_grad(Node<T> &self, std::size_t i) {
  Node<T> *p = self.parents[i].get();
  if (p == nullptr || !p->requires_grad)
    return nullptr;
  return &p->ensure_grad();
}

template <class T>
void Tensor<T>::backward() const {
  if (numel() != 1)
    throw Error(ErrorKind::kNotScalar,
                "backward() needs a scalar, got " + shape_str(shape()));
  if (!requires_grad())
    return;

  // Iterative post-order DFS; reversed it is a topological order.
  std::vector<Node<T> *> order;
  std::unordered_set<Node<T> *> seen;
  std::vector<std::pair<Node<T> *, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto &[n, next] = stack.back();
    if (next < n->parents.size()) {
      Node<T> *p = n->parents[next++].get();
      if (p != nullptr && p->requires_grad && seen.insert(p).second)
        stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  for (Node<T> *n: order) {
    if (!n->is_leaf())
      n->grad.assign(n->value.size(), T(0));
  }
  node_->ensure_grad()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (!(*it)->is_leaf())
      (*it)->backward_fn(**it);
  }
}

}  // namespace molrange::nn
