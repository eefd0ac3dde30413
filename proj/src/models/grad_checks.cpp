// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/models/grad_checks.hpp"

#include <mutex>

#include "svsm/geometry/prope.hpp"
#include "svsm/models/loss.hpp"
#include "svsm/models/model.hpp"
#include "svsm/scenegen/scene.hpp"
#include "svsm/tensor/grad_check.hpp"
#include "svsm/tensor/ops.hpp"
#include "svsm/util/random.hpp"

namespace svsm {
namespace {

using Vars = std::span<const Var<double>>;

Var<double> project(Var<double> out, std::uint64_t seed) {
  auto w = out.tape().constant(random_tensor(out.shape(), seed ^ 0x5A5A5A5AULL));
  return ops::sum(ops::mul(out, w));
}

std::vector<Mat4> projections(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Mat4> ps;
  for (std::size_t i = 0; i < n; ++i)
    ps.push_back(projection_matrix(random_rigid(rng), {1.1 + 0.1 * double(i % 3), 0.9, 0.05, -0.1}));
  return ps;
}

GradCheckReport model_check(Family family, std::uint64_t seed) {
  ModelConfig c;
  c.family = family;
  c.enc_dim = c.dec_dim = 8;
  c.head_dim = 4;
  c.patch_size = 4;
  c.enc_layers = c.dec_layers = 1;
  c.prope = PropeMode::both;
  if (has_fixed_latent(family)) c.fixed_latent_tokens = 3;
  Model<double> m(c, 8, 8, seed + 21);
  // Perturbed weights keep every parameter's gradient well away from zero.
  Rng rng(seed + 5);
  for (auto& p : m.parameters())
    for (auto& v : p.tensor->data()) v += 0.3 * rng.normal();
  Rng ep_rng(seed + 3);
  std::vector<Episode> batch{
      sample_episode(generate_scene(seed + 12), trajectory_preset("multiview"), 2, 2, 8, 8, ep_rng)};
  const auto gt = m.target_images(batch);
  std::vector<Tensor<double>*> params;
  for (auto& p : m.parameters()) params.push_back(p.tensor);
  auto rep = grad_check_inplace(
      [&](Tape<double>& tape) { return training_loss(m.forward(tape, batch), tape.constant(gt)); }, params);
  rep.name = "model_" + to_string(family);
  return rep;
}

}  // namespace

void register_model_grad_checks() {
  static std::once_flag once;
  std::call_once(once, [] {
    register_grad_check("rho_apply", [](std::uint64_t seed) {
      const auto p = projections(1, seed)[0];
      auto rep = grad_check([&](Tape<double>&, Vars v) { return project(rho_apply(v[0], p), seed); },
                            {random_tensor({2, 3, 8}, seed).set_requires_grad(true)});
      rep.name = "rho_apply";
      return rep;
    });
    register_grad_check("prope_attention", [](std::uint64_t seed) {
      const auto pq = projections(6, seed), pkv = projections(8, seed + 1);
      auto rep = grad_check(
          [&](Tape<double>&, Vars v) { return project(prope_attention(v[0], v[1], v[2], pq, pkv, 2), seed); },
          {random_tensor({2, 3, 8}, seed).set_requires_grad(true), random_tensor({2, 4, 8}, seed + 1).set_requires_grad(true),
           random_tensor({2, 4, 8}, seed + 2).set_requires_grad(true)});
      rep.name = "prope_attention";
      return rep;
    });
    register_grad_check("training_loss", [](std::uint64_t seed) {
      auto rep = grad_check([](Tape<double>&, Vars v) { return training_loss(v[0], v[1]); },
                            {random_tensor({1, 8, 8, 3}, seed, 0.5).set_requires_grad(true), random_tensor({1, 8, 8, 3}, seed + 1, 0.5)});
      rep.name = "training_loss";
      return rep;
    });
    for (Family f : {Family::lvsm_dec, Family::svsm_encdec, Family::svsm_fixed, Family::lvsm_encdec})
      register_grad_check("model_" + to_string(f), [f](std::uint64_t seed) { return model_check(f, seed); });
  });
}

}  // namespace svsm
