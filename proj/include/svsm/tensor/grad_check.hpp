// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "svsm/tensor/tape.hpp"

namespace svsm {

struct GradCheckReport {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;

  bool passed(double tolerance) const { return checked > 0 && max_rel_error < tolerance; }
};

/// Builds a scalar from leaf variables bound to the given inputs.
using ScalarFn = std::function<Var<double>(Tape<double>&, std::span<const Var<double>>)>;

/// Compares reverse-mode gradients of `fn` against central differences with step `h`.
///
/// Relative error per coordinate is |analytic - numeric| / max(|analytic|, |numeric|, floor),
/// where floor is 1e-3 of the largest numeric gradient magnitude over all checked inputs
/// (and at least 1e-10), so coordinates far below the gradient's scale are judged at that scale.
/// Only inputs with requires_grad set are checked.
GradCheckReport grad_check(const ScalarFn& fn, std::vector<Tensor<double>> inputs, double h = 1e-5);

/// Same comparison for tensors owned elsewhere (model parameters): `fn` reads them via
/// Tape::input and each coordinate is perturbed in place, then restored.
GradCheckReport grad_check_inplace(const std::function<Var<double>(Tape<double>&)>& fn,
                                   const std::vector<Tensor<double>*>& params, double h = 1e-5);

/// Fills a tensor with N(0, stddev) values from a seeded generator.
Tensor<double> random_tensor(const Shape& shape, std::uint64_t seed, double stddev = 1.0);

/// Named gradient checks with fixed random inputs, looked up by op name.
using RegisteredCheck = std::function<GradCheckReport(std::uint64_t seed)>;

void register_grad_check(const std::string& name, RegisteredCheck check);
std::vector<std::string> registered_grad_checks();
/// Runs a registered check. Unknown names raise UsageError.
GradCheckReport grad_check(const std::string& op_name, std::uint64_t seed = 0);

}  // namespace svsm
