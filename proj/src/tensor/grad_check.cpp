// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/tensor/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "svsm/errors.hpp"
#include "svsm/tensor/nn.hpp"
#include "svsm/util/random.hpp"

namespace svsm {
namespace {

double evaluate(const ScalarFn& fn, const std::vector<Tensor<double>>& inputs) {
  Tape<double> tape(false);
  std::vector<Var<double>> vars;
  vars.reserve(inputs.size());
  for (const auto& t : inputs) vars.push_back(tape.input(t));
  return fn(tape, vars).value().item();
}

// Sums out ⊙ R for a fixed random R so every output element affects the scalar.
Var<double> project(Var<double> out, std::uint64_t seed) {
  auto weights = out.tape().constant(random_tensor(out.shape(), seed ^ 0xA5A5A5A5ULL));
  return ops::sum(ops::mul(out, weights));
}

std::map<std::string, RegisteredCheck>& registry() {
  static std::map<std::string, RegisteredCheck> checks;
  return checks;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

Tensor<double> with_grad(Tensor<double> t) {
  t.set_requires_grad(true);
  return t;
}

void register_builtin_checks() {
  using Vars = std::span<const Var<double>>;
  auto unary = [](const std::string& name, Shape shape, auto op) {
    registry()[name] = [name, shape, op](std::uint64_t seed) {
      auto rep = grad_check([op, seed](Tape<double>&, Vars v) { return project(op(v[0]), seed); },
                            {with_grad(random_tensor(shape, seed))});
      rep.name = name;
      return rep;
    };
  };
  unary("gelu", {3, 5}, [](Var<double> x) { return ops::gelu(x); });
  unary("sigmoid", {3, 5}, [](Var<double> x) { return ops::sigmoid(x); });
  unary("softmax", {4, 6}, [](Var<double> x) { return ops::softmax(x); });
  unary("scale", {2, 3}, [](Var<double> x) { return ops::scale(x, -1.7); });
  unary("split_merge_heads", {2, 3, 8}, [](Var<double> x) {
    return ops::merge_heads(ops::mul(ops::split_heads(x, 2), ops::split_heads(x, 2)), 2);
  });
  unary("slice_concat_tokens", {2, 5, 4}, [](Var<double> x) {
    std::vector<Var<double>> parts{ops::slice_tokens(x, 3, 2), ops::slice_tokens(x, 0, 3)};
    return ops::gelu(ops::concat_tokens<double>(parts));
  });
  unary("unpatchify", {2, 4, 12}, [](Var<double> x) { return ops::gelu(ops::unpatchify(x, 4, 4, 2, 3)); });
  unary("block4_transform", {2, 3, 8}, [](Var<double> x) {
    auto mats = std::make_shared<std::vector<ops::Block4<double>>>();
    auto r = random_tensor({6, 16}, 77);
    for (std::size_t t = 0; t < 6; ++t) {
      ops::Block4<double> m;
      for (std::size_t i = 0; i < 16; ++i) m[i] = r[t * 16 + i];
      mats->push_back(m);
    }
    return ops::block4_transform<double>(x, mats);
  });

  auto binary = [](const std::string& name, Shape a, Shape b, auto op) {
    registry()[name] = [name, a, b, op](std::uint64_t seed) {
      auto rep = grad_check([op, seed](Tape<double>&, Vars v) { return project(op(v[0], v[1]), seed); },
                            {with_grad(random_tensor(a, seed)), with_grad(random_tensor(b, seed + 1))});
      rep.name = name;
      return rep;
    };
  };
  binary("add", {3, 4}, {3, 4}, [](Var<double> x, Var<double> y) { return ops::add(x, y); });
  binary("mul", {3, 4}, {3, 4}, [](Var<double> x, Var<double> y) { return ops::mul(x, y); });
  binary("matmul", {2, 3, 4}, {4, 5}, [](Var<double> x, Var<double> y) { return ops::matmul(x, y); });
  binary("bmm", {2, 3, 4}, {2, 4, 5}, [](Var<double> x, Var<double> y) { return ops::bmm(x, y, false); });
  binary("bmm_transposed", {2, 3, 4}, {2, 5, 4}, [](Var<double> x, Var<double> y) { return ops::bmm(x, y, true); });
  binary("residual_add", {3, 4}, {3, 4}, [](Var<double> x, Var<double> y) { return ops::residual_add(x, y, 4); });
  binary("repeat_each", {2, 3, 4}, {6, 3, 4},
         [](Var<double> x, Var<double> y) { return ops::mul(ops::repeat_each(x, 3), y); });
  binary("repeat_batch", {3, 4}, {2, 3, 4},
         [](Var<double> x, Var<double> y) { return ops::mul(ops::repeat_batch(x, 2), y); });

  registry()["mse"] = [](std::uint64_t seed) {
    auto rep = grad_check([](Tape<double>&, Vars v) { return ops::mse(v[0], v[1]); },
                          {with_grad(random_tensor({3, 4}, seed)), with_grad(random_tensor({3, 4}, seed + 1))});
    rep.name = "mse";
    return rep;
  };
  registry()["linear"] = [](std::uint64_t seed) {
    auto rep = grad_check(
        [seed](Tape<double>&, Vars v) { return project(ops::linear(v[0], v[1], v[2]), seed); },
        {with_grad(random_tensor({2, 3, 4}, seed)), with_grad(random_tensor({4, 5}, seed + 1)),
         with_grad(random_tensor({5}, seed + 2))});
    rep.name = "linear";
    return rep;
  };
  registry()["layer_norm"] = [](std::uint64_t seed) {
    auto rep = grad_check(
        [seed](Tape<double>&, Vars v) { return project(ops::layer_norm(v[0], v[1], v[2]), seed); },
        {with_grad(random_tensor({3, 6}, seed)), with_grad(random_tensor({6}, seed + 1)),
         with_grad(random_tensor({6}, seed + 2))});
    rep.name = "layer_norm";
    return rep;
  };
  registry()["conv2d"] = [](std::uint64_t seed) {
    auto rep = grad_check(
        [seed](Tape<double>&, Vars v) { return project(ops::conv2d(v[0], v[1], v[2], 2, 1), seed); },
        {with_grad(random_tensor({2, 5, 5, 3}, seed)), with_grad(random_tensor({3, 3, 3, 4}, seed + 1)),
         with_grad(random_tensor({4}, seed + 2))});
    rep.name = "conv2d";
    return rep;
  };
  registry()["attention_block"] = [](std::uint64_t seed) {
    auto rep = grad_check(
        [seed](Tape<double>&, Vars v) { return project(nn::attention_block(v[0], v[1], v[2], 2), seed); },
        {with_grad(random_tensor({2, 3, 8}, seed)), with_grad(random_tensor({2, 3, 8}, seed + 1)),
         with_grad(random_tensor({2, 3, 8}, seed + 2))});
    rep.name = "attention_block";
    return rep;
  };
  registry()["mlp_block"] = [](std::uint64_t seed) {
    auto rep = grad_check(
        [seed](Tape<double>&, Vars v) {
          nn::MlpWeights<double> w{v[1], v[2], v[3], v[4]};
          return project(nn::mlp_block(v[0], w), seed);
        },
        {with_grad(random_tensor({4, 6}, seed)), with_grad(random_tensor({6, 24}, seed + 1, 0.3)),
         with_grad(random_tensor({24}, seed + 2)), with_grad(random_tensor({24, 6}, seed + 3, 0.3)),
         with_grad(random_tensor({6}, seed + 4))});
    rep.name = "mlp_block";
    return rep;
  };
}

}  // namespace

Tensor<double> random_tensor(const Shape& shape, std::uint64_t seed, double stddev) {
  Rng rng(seed);
  Tensor<double> t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = stddev * rng.normal();
  return t;
}

namespace {

// Relative errors use a floor at 1e-3 of the largest numeric gradient in the whole check,
// so coordinates whose true gradient vanishes are judged against the check's scale
// rather than against finite-difference rounding noise.
GradCheckReport compare(const std::vector<Tensor<double>>& analytic, const std::vector<std::vector<double>>& numeric) {
  double scale = 0.0;
  for (const auto& n : numeric)
    for (double v : n) scale = std::max(scale, std::abs(v));
  const double floor = std::max(1e-10, 1e-3 * scale);
  GradCheckReport rep;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    for (std::size_t j = 0; j < numeric[i].size(); ++j) {
      const double a = analytic[i][j];
      const double abs_err = std::abs(a - numeric[i][j]);
      const double denom = std::max({std::abs(a), std::abs(numeric[i][j]), floor});
      rep.max_abs_error = std::max(rep.max_abs_error, abs_err);
      rep.max_rel_error = std::max(rep.max_rel_error, abs_err / denom);
      ++rep.checked;
    }
  }
  return rep;
}

std::vector<double> central_differences(Tensor<double>& t, double h, const std::function<double()>& eval) {
  std::vector<double> numeric(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) {
    const double orig = t[j];
    t[j] = orig + h;
    const double up = eval();
    t[j] = orig - h;
    const double down = eval();
    t[j] = orig;
    numeric[j] = (up - down) / (2.0 * h);
  }
  return numeric;
}

}  // namespace

GradCheckReport grad_check(const ScalarFn& fn, std::vector<Tensor<double>> inputs, double h) {
  std::vector<Tensor<double>> analytic(inputs.size());
  {
    Tape<double> tape;
    std::vector<Var<double>> vars;
    for (const auto& t : inputs) vars.push_back(tape.input(t));
    auto loss = fn(tape, vars);
    auto grads = tape.backward(loss);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (inputs[i].requires_grad()) analytic[i] = grads.of(vars[i]);
    }
  }
  std::vector<Tensor<double>> checked;
  std::vector<std::vector<double>> numeric;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!inputs[i].requires_grad()) continue;
    numeric.push_back(central_differences(inputs[i], h, [&] { return evaluate(fn, inputs); }));
    checked.push_back(std::move(analytic[i]));
  }
  return compare(checked, numeric);
}

GradCheckReport grad_check_inplace(const std::function<Var<double>(Tape<double>&)>& fn,
                                   const std::vector<Tensor<double>*>& params, double h) {
  std::vector<Tensor<double>> analytic;
  {
    Tape<double> tape;
    auto grads = tape.backward(fn(tape));
    for (const auto* p : params) {
      const Tensor<double>* g = grads.find(*p);
      analytic.push_back(g ? *g : Tensor<double>(p->shape()));
    }
  }
  auto eval = [&] {
    Tape<double> tape(false);
    return fn(tape).value().item();
  };
  std::vector<std::vector<double>> numeric;
  for (auto* p : params) numeric.push_back(central_differences(*p, h, eval));
  return compare(analytic, numeric);
}

void register_grad_check(const std::string& name, RegisteredCheck check) {
  std::lock_guard lock(registry_mutex());
  if (registry().empty()) register_builtin_checks();
  registry()[name] = std::move(check);
}

std::vector<std::string> registered_grad_checks() {
  std::lock_guard lock(registry_mutex());
  if (registry().empty()) register_builtin_checks();
  std::vector<std::string> names;
  for (const auto& [name, _] : registry()) names.push_back(name);
  return names;
}

GradCheckReport grad_check(const std::string& op_name, std::uint64_t seed) {
  RegisteredCheck check;
  {
    std::lock_guard lock(registry_mutex());
    if (registry().empty()) register_builtin_checks();
    auto it = registry().find(op_name);
    if (it == registry().end()) throw UsageError("no gradient check registered for op '" + op_name + "'");
    check = it->second;
  }
  return check(seed);
}

}  // namespace svsm
