// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <unordered_map>
#include <vector>

#include "svsm/tensor/tensor.hpp"

namespace svsm {

template <typename T>
class Tape;

/// Handle to a value recorded on a Tape.
template <typename T>
class Var {
 public:
  Var() = default;

  Tape<T>& tape() const { return *tape_; }
  int id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }
  const Tensor<T>& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Tape<T>;
  Var(Tape<T>* tape, int id) : tape_(tape), id_(id) {}

  Tape<T>* tape_ = nullptr;
  int id_ = -1;
};

/// Gradients produced by one backward pass, for every leaf that required them.
template <typename T>
class Gradients {
 public:
  const Tensor<T>& of(Var<T> leaf) const;
  /// Gradient of a borrowed leaf tensor (see Tape::input), or nullptr.
  const Tensor<T>* find(const Tensor<T>& leaf) const;
  std::size_t size() const noexcept { return by_id_.size(); }

 private:
  friend class Tape<T>;
  std::unordered_map<int, Tensor<T>> by_id_;
  std::unordered_map<const Tensor<T>*, int> by_source_;
};

/// Ordered record of executed ops, replayed in reverse by backward().
///
/// Values live in a deque so references returned by value() stay valid while
/// more ops are recorded. A tape is consumed by backward(); recording on or
/// differentiating a consumed tape is a UsageError.
template <typename T>
class Tape {
 public:
  /// Called during backward with the upstream gradient of the op's output.
  using BackwardFn = std::function<void(Tape&, const Tensor<T>& grad_out)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const noexcept { return grad_enabled_; }

  /// Owned leaf that never receives a gradient.
  Var<T> constant(Tensor<T> value);
  /// Borrowed leaf; receives a gradient iff `value.requires_grad()` and the tape
  /// has gradients enabled. `value` must outlive the tape. Registering the same
  /// tensor twice returns the same Var.
  Var<T> input(const Tensor<T>& value);
  /// Records an op result. `backward` is kept only if some input needs a gradient.
  Var<T> record(Tensor<T> value, std::initializer_list<Var<T>> inputs, BackwardFn backward);
  Var<T> record(Tensor<T> value, std::span<const Var<T>> inputs, BackwardFn backward);

  const Tensor<T>& value(Var<T> v) const;
  bool needs_grad(Var<T> v) const;
  /// Gradient accumulator of `v`, zero-initialised on first access. Only valid during backward.
  Tensor<T>& grad(Var<T> v);

  /// Reverse-mode sweep from a scalar loss.
  Gradients<T> backward(Var<T> loss);

  std::size_t size() const noexcept { return nodes_.size(); }
  bool consumed() const noexcept { return consumed_; }

 private:
  struct Node {
    Tensor<T> owned;
    const Tensor<T>* borrowed = nullptr;
    BackwardFn backward;
    bool needs_grad = false;
    bool leaf = true;
    Tensor<T> grad;
  };

  Node& node(Var<T> v);
  const Node& node(Var<T> v) const;
  void check_open() const;

  std::deque<Node> nodes_;
  std::unordered_map<const Tensor<T>*, int> borrowed_ids_;
  bool grad_enabled_;
  bool consumed_ = false;
  bool in_backward_ = false;
};

extern template class Var<float>;
extern template class Var<double>;
extern template class Gradients<float>;
extern template class Gradients<double>;
extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace svsm
