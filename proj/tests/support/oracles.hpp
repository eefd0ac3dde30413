// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations shared by the unit and acceptance tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "svsm/geometry/geometry.hpp"
#include "svsm/scaling/run_log.hpp"
#include "svsm/scaling/scaling.hpp"
#include "svsm/tensor/tensor.hpp"
#include "svsm/util/random.hpp"

namespace svsm::oracle {

// Brute-force per-pair form: logits q_iᵀ ρ(P_i P_j⁻¹) k_j, values ρ(P_i P_j⁻¹) v_j.
// q is [1, n_q, d], k and v are [1, n_kv, d].
inline Tensor<double> brute_force_prope(const Tensor<double>& q, const Tensor<double>& k, const Tensor<double>& v,
                                        const std::vector<Mat4>& pq, const std::vector<Mat4>& pk, std::size_t heads) {
  const std::size_t nq = q.dim(1), nk = k.dim(1), d = q.dim(2), e = d / heads;
  Tensor<double> out({1, nq, d});
  for (std::size_t h = 0; h < heads; ++h)
    for (std::size_t i = 0; i < nq; ++i) {
      std::vector<double> logits(nk);
      std::vector<std::vector<double>> vals(nk, std::vector<double>(e));
      for (std::size_t j = 0; j < nk; ++j) {
        const Mat4 rel = mat4_mul(pq[i], mat4_inverse(pk[j]));
        double s = 0;
        for (std::size_t blk = 0; blk < e; blk += 4)
          for (std::size_t r = 0; r < 4; ++r) {
            double kr = 0, vr = 0;
            for (std::size_t c = 0; c < 4; ++c) {
              kr += rel[r * 4 + c] * k[j * d + h * e + blk + c];
              vr += rel[r * 4 + c] * v[j * d + h * e + blk + c];
            }
            s += q[i * d + h * e + blk + r] * kr;
            vals[j][blk + r] = vr;
          }
        logits[j] = s / std::sqrt(double(e));
      }
      double mx = *std::max_element(logits.begin(), logits.end()), z = 0;
      for (auto& l : logits) z += (l = std::exp(l - mx));
      for (std::size_t c = 0; c < e; ++c) {
        double acc = 0;
        for (std::size_t j = 0; j < nk; ++j) acc += logits[j] / z * vals[j][c];
        out[i * d + h * e + c] = acc;
      }
    }
  return out;
}

// Frontier whose records follow N = χ^a, D = χ^b over three decades, each with
// independent multiplicative N(0, noise) perturbation.
inline std::vector<ParetoPoint> synthetic_frontier(double a, double b, double noise, std::uint64_t seed,
                                                   std::size_t points = 25) {
  Rng rng(seed);
  std::vector<ParetoPoint> out;
  for (std::size_t i = 0; i < points; ++i) {
    const double chi = std::pow(10.0, 15.0 + 3.0 * double(i) / double(points - 1));
    ParetoPoint p;
    p.budget = p.record_flops = chi;
    p.run_id = "r" + std::to_string(i);
    p.N = std::uint64_t(std::llround(std::pow(chi, a) * (1.0 + noise * rng.normal())));
    p.D = std::uint64_t(std::llround(std::pow(chi, b) * (1.0 + noise * rng.normal())));
    p.loss = 1.0 / double(i + 1);
    out.push_back(p);
  }
  return out;
}

// Loss = split·(χ/10¹⁸)^c, with c_high above the split and c_low below it.
inline std::vector<ParetoPoint> two_slope_frontier(double c_high, double c_low, double split) {
  std::vector<ParetoPoint> out;
  const double knee = 1e18;
  for (int i = 0; i <= 40; ++i) {
    const double chi = std::pow(10.0, 16.0 + 4.0 * i / 40.0);
    ParetoPoint p;
    p.budget = p.record_flops = chi;
    p.run_id = "r" + std::to_string(i);
    p.loss = split * std::pow(chi / knee, chi < knee ? c_high : c_low);
    out.push_back(p);
  }
  return out;
}

// Random multi-run log with coarse losses (forcing ties), occasional NaN losses and
// repeated flops, plus an irregular budget grid that starts below every record.
inline std::pair<std::vector<RunLogRecord>, std::vector<double>> random_pareto_case(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<RunLogRecord> recs;
  const int runs = int(rng.uniform_int(1, 6));
  for (int r = 0; r < runs; ++r) {
    double flops = 0;
    const int n = int(rng.uniform_int(1, 12));
    for (int s = 0; s < n; ++s) {
      flops += double(rng.uniform_int(0, 3));
      RunLogRecord rec;
      rec.run_id = "run" + std::to_string(r);
      rec.family = "svsm_encdec";
      rec.N = std::uint64_t(r + 1);
      rec.D = std::uint64_t(s);
      rec.flops = flops;
      rec.eval_loss = double(rng.uniform_int(1, 8)) / 8.0;
      if (rng.uniform01() < 0.05) rec.eval_loss = std::nan("");
      recs.push_back(rec);
    }
  }
  std::vector<double> grid;
  for (double g = -1; g < 40; g += rng.uniform(0.5, 4.0)) grid.push_back(g);
  return {recs, grid};
}

}  // namespace svsm::oracle
