// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/tensor/tape.hpp"

#include "svsm/errors.hpp"

namespace svsm {

template <typename T>
const Tensor<T>& Var<T>::value() const {
  if (!tape_) throw UsageError("value() on an unbound Var");
  return tape_->value(*this);
}

template <typename T>
const Tensor<T>& Gradients<T>::of(Var<T> leaf) const {
  auto it = by_id_.find(leaf.id());
  if (it == by_id_.end()) throw UsageError("no gradient recorded for this variable");
  return it->second;
}

template <typename T>
const Tensor<T>* Gradients<T>::find(const Tensor<T>& leaf) const {
  auto it = by_source_.find(&leaf);
  if (it == by_source_.end()) return nullptr;
  return &by_id_.at(it->second);
}

template <typename T>
void Tape<T>::check_open() const {
  if (consumed_) throw UsageError("tape already consumed by backward()");
}

template <typename T>
auto Tape<T>::node(Var<T> v) -> Node& {
  if (v.tape_ != this || v.id_ < 0 || static_cast<std::size_t>(v.id_) >= nodes_.size()) {
    throw UsageError("variable does not belong to this tape");
  }
  return nodes_[static_cast<std::size_t>(v.id_)];
}

template <typename T>
auto Tape<T>::node(Var<T> v) const -> const Node& {
  return const_cast<Tape*>(this)->node(v);
}

template <typename T>
Var<T> Tape<T>::constant(Tensor<T> value) {
  check_open();
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return Var<T>(this, static_cast<int>(nodes_.size() - 1));
}

template <typename T>
Var<T> Tape<T>::input(const Tensor<T>& value) {
  check_open();
  if (auto it = borrowed_ids_.find(&value); it != borrowed_ids_.end()) return Var<T>(this, it->second);
  Node n;
  n.borrowed = &value;
  n.needs_grad = grad_enabled_ && value.requires_grad();
  nodes_.push_back(std::move(n));
  borrowed_ids_.emplace(&value, static_cast<int>(nodes_.size() - 1));
  return Var<T>(this, static_cast<int>(nodes_.size() - 1));
}

template <typename T>
Var<T> Tape<T>::record(Tensor<T> value, std::initializer_list<Var<T>> inputs, BackwardFn backward) {
  return record(std::move(value), std::span<const Var<T>>(inputs.begin(), inputs.size()),
                std::move(backward));
}

template <typename T>
Var<T> Tape<T>::record(Tensor<T> value, std::span<const Var<T>> inputs, BackwardFn backward) {
  check_open();
  Node n;
  n.owned = std::move(value);
  n.leaf = false;
  if (grad_enabled_) {
    for (const auto& in : inputs) n.needs_grad = n.needs_grad || node(in).needs_grad;
  }
  if (n.needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var<T>(this, static_cast<int>(nodes_.size() - 1));
}

template <typename T>
const Tensor<T>& Tape<T>::value(Var<T> v) const {
  const Node& n = node(v);
  return n.borrowed ? *n.borrowed : n.owned;
}

template <typename T>
bool Tape<T>::needs_grad(Var<T> v) const {
  return node(v).needs_grad;
}

template <typename T>
Tensor<T>& Tape<T>::grad(Var<T> v) {
  if (!in_backward_) throw UsageError("grad() is only available during backward()");
  Node& n = node(v);
  if (n.grad.empty()) n.grad = Tensor<T>(value(v).shape());
  return n.grad;
}

template <typename T>
Gradients<T> Tape<T>::backward(Var<T> loss) {
  check_open();
  if (value(loss).size() != 1) {
    throw UsageError("backward() requires a scalar loss, got shape " + to_string(value(loss).shape()));
  }
  consumed_ = true;
  in_backward_ = true;
  Gradients<T> out;
  if (node(loss).needs_grad) {
    grad(loss)[0] = T(1);
    for (int id = loss.id(); id >= 0; --id) {
      Node& n = nodes_[static_cast<std::size_t>(id)];
      if (n.leaf || !n.needs_grad || n.grad.empty()) continue;
      n.backward(*this, n.grad);
      // Intermediate gradients and closures are dead once propagated.
      n.grad = Tensor<T>();
      n.backward = nullptr;
    }
  }
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    Node& n = nodes_[id];
    if (!n.leaf || !n.needs_grad) continue;
    Tensor<T> g = n.grad.empty() ? Tensor<T>(value(Var<T>(this, static_cast<int>(id))).shape()) : std::move(n.grad);
    out.by_id_.emplace(static_cast<int>(id), std::move(g));
    if (n.borrowed) out.by_source_.emplace(n.borrowed, static_cast<int>(id));
  }
  in_backward_ = false;
  return out;
}

template class Var<float>;
template class Var<double>;
template class Gradients<float>;
template class Gradients<double>;
template class Tape<float>;
template class Tape<double>;

}  // namespace svsm
