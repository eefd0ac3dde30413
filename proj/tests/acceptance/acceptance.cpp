// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero if any fails.
//
//   svsm_acceptance --group fast|effective-batch|compute-advantage|all [--work-dir DIR]
//
// The two training groups run seeded sweeps under the work directory and reuse completed runs.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <unistd.h>

#include "support/oracles.hpp"
#include "svsm/errors.hpp"
#include "svsm/flops/flops.hpp"
#include "svsm/geometry/prope.hpp"
#include "svsm/harness/bench.hpp"
#include "svsm/harness/config.hpp"
#include "svsm/harness/sweep.hpp"
#include "svsm/models/grad_checks.hpp"
#include "svsm/models/model.hpp"
#include "svsm/scaling/effective_batch.hpp"
#include "svsm/scaling/run_log.hpp"
#include "svsm/scaling/scaling.hpp"
#include "svsm/scenegen/dataset.hpp"
#include "svsm/scenegen/render.hpp"
#include "svsm/tensor/grad_check.hpp"
#include "svsm/util/random.hpp"

namespace fs = std::filesystem;
using namespace svsm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void check(const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << fmt::format(" [{:.1f} s]", secs)
            << std::endl;
}

ModelConfig square(Family f, std::uint64_t d, std::uint64_t layers) {
  ModelConfig c;
  c.family = f;
  c.enc_dim = c.dec_dim = d;
  c.enc_layers = c.dec_layers = layers;
  c.head_dim = 16;
  c.patch_size = 8;
  return c;
}

double max_rel(const Tensor<double>& ref, const Tensor<double>& x) {
  double scale = 0, dev = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    scale = std::max(scale, std::abs(ref[i]));
    dev = std::max(dev, std::abs(ref[i] - x[i]));
  }
  return dev / scale;
}

// ---------------------------------------------------------------------------------------------

void flop_ratios() {
  check("flop_mlp_ratio", [] {
    const auto l = square(Family::lvsm_dec, 64, 2), s = square(Family::svsm_encdec, 64, 2);
    const auto l26 = forward_flops(l, 2, 6, 32, 32).mlp_proj, s26 = forward_flops(s, 2, 6, 32, 32).mlp_proj;
    const auto l44 = forward_flops(l, 4, 4, 32, 32).mlp_proj, s44 = forward_flops(s, 4, 4, 32, 32).mlp_proj;
    const bool ok = l26 * 8 == s26 * 18 && l44 * 8 == s44 * 20;
    return Outcome{ok, fmt::format("(2,6) {}/{} = {:.6f}; (4,4) {}/{} = {:.6f}", to_string(l26), to_string(s26),
                                   to_double(l26) / to_double(s26), to_string(l44), to_string(s44),
                                   to_double(l44) / to_double(s44))};
  });
  check("flop_paper_constant", [] {
    const auto f = self_attn_layer_flops(512, 384, FlopMode::paper_constant);
    return Outcome{f.mlp_proj == 3 * f.attn,
                   fmt::format("mlp {} attn {} ratio {:.6f}", to_string(f.mlp_proj), to_string(f.attn),
                               to_double(f.mlp_proj) / to_double(f.attn))};
  });
  check("flop_constant_beff", [] {
    bool ok = true;
    for (std::uint64_t vc : {1, 2, 4})
      for (std::uint64_t d : {64, 128}) {
        const auto l = square(Family::lvsm_dec, d, 3), s = square(Family::svsm_encdec, d, 3);
        const std::pair<std::uint64_t, std::uint64_t> shapes[] = {{32, 1}, {16, 2}, {8, 4}, {4, 8}, {2, 16}};
        const auto ref = train_flops(l, vc, 1, 32, 100, 32, 32);
        for (auto [b, vt] : shapes) ok = ok && train_flops(l, vc, vt, b, 100, 32, 32) == ref;
        for (std::size_t i = 1; i < std::size(shapes); ++i)
          ok = ok && train_flops(s, vc, shapes[i].second, shapes[i].first, 100, 32, 32) <
                         train_flops(s, vc, shapes[i - 1].second, shapes[i - 1].first, 100, 32, 32);
      }
    return Outcome{ok, "LVSM equal across B*V_T = 32; SVSM strictly decreasing as V_T doubles"};
  });
}

void gradient_suite() {
  check("gradient_suite", [] {
    register_model_grad_checks();
    double worst = 0;
    std::string worst_name;
    std::vector<std::string> bad;
    const auto names = registered_grad_checks();
    for (const auto& name : names) {
      const auto r = grad_check(name);
      if (!r.passed(1e-4)) bad.push_back(name);
      if (r.max_rel_error > worst) worst = r.max_rel_error, worst_name = name;
    }
    std::string detail = fmt::format("{} checks, worst {} at {:.2e}", names.size(), worst_name, worst);
    for (const auto& b : bad) detail += " failed:" + b;
    return Outcome{bad.empty(), detail};
  });
}

void prope_invariance() {
  check("prope_frame_invariance", [] {
    ModelConfig c = square(Family::svsm_encdec, 16, 2);
    c.enc_layers = 1;
    c.head_dim = 8;
    Rng rng(3);
    const auto ep = sample_episode(generate_scene(12), trajectory_preset("multiview"), 2, 2, 16, 16, rng);
    std::vector<Camera> cams;
    for (const auto& v : ep.target) cams.push_back({v.pose, v.intrinsics});
    std::vector<Pose> reframes;
    for (int trial = 0; trial < 20; ++trial) reframes.push_back(random_rigid(rng));
    // Largest relative output change over the reframes.
    auto deviation = [&](PropeMode mode) {
      c.prope = mode;
      Model<double> m(c, 16, 16, 9);
      for (auto& p : m.parameters())
        for (auto& x : p.tensor->data()) x *= 2.0;
      const auto base = m.render(ep.context, cams);
      double worst = 0;
      for (const Pose& g : reframes) {
        auto ctx = ep.context;
        auto tgt = cams;
        for (auto& v : ctx) v.pose = v.pose * g;
        for (auto& t : tgt) t.pose = t.pose * g;
        const auto moved = m.render(ctx, tgt);
        for (std::size_t t = 0; t < base.size(); ++t) worst = std::max(worst, max_rel(base[t], moved[t]));
      }
      return worst;
    };
    const double worst = deviation(PropeMode::both);
    const double control = deviation(PropeMode::none);
    double brute = 0;
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t n = 2 + trial % 7;
      std::vector<Mat4> ps;
      for (std::size_t t = 0; t < n; ++t)
        ps.push_back(projection_matrix(random_rigid(rng), Intrinsics{rng.uniform(0.7, 1.5), rng.uniform(0.7, 1.5), 0.1, -0.1}));
      auto q = random_tensor({1, n, 8}, 10 + trial), k = random_tensor({1, n, 8}, 20 + trial),
           v = random_tensor({1, n, 8}, 30 + trial);
      Tape<double> tape(false);
      auto fast = prope_attention<double>(tape.constant(q), tape.constant(k), tape.constant(v), ps, ps, 2).value();
      const auto slow = oracle::brute_force_prope(q, k, v, ps, ps, 2);
      for (std::size_t i = 0; i < fast.size(); ++i) brute = std::max(brute, std::abs(fast[i] - slow[i]));
    }
    return Outcome{worst < 1e-5 && brute < 1e-9,
                   fmt::format("20 reframes max rel dev {:.2e} (world-frame control {:.2e}); factored vs brute force {:.2e}",
                               worst, control, brute)};
  });
}

void decode_independence() {
  check("decode_independence", [] {
    ModelConfig c = square(Family::svsm_encdec, 32, 2);
    c.head_dim = 8;
    bool ok = true;
    std::size_t compared = 0;
    for (PropeMode pm : {PropeMode::none, PropeMode::both}) {
      c.prope = pm;
      Model<double> m(c, 16, 16, 4);
      Rng rng(5);
      const auto ep = sample_episode(generate_scene(5), trajectory_preset("multiview"), 2, 6, 16, 16, rng);
      std::vector<Camera> cams;
      for (const auto& v : ep.target) cams.push_back({v.pose, v.intrinsics});
      const auto z = m.encode(ep.context);
      const auto joint = m.decode(z, cams);
      for (std::size_t t = 0; t < cams.size(); ++t) {
        const auto single = m.decode(z, std::span<const Camera>(&cams[t], 1));
        ok = ok && std::equal(joint[t].data().begin(), joint[t].data().end(), single[0].data().begin());
        ++compared;
      }
    }
    return Outcome{ok, fmt::format("{} targets bit-identical between joint and single decoding", compared)};
  });
}

void scaling_fit() {
  check("scaling_fit_recovery", [] {
    double err_clean = 0, err_noisy = 0;
    for (auto [a, b] : {std::pair{0.52, 0.47}, std::pair{0.65, 0.33}}) {
      const auto clean = chinchilla_fit(oracle::synthetic_frontier(a, b, 0.0, 1));
      err_clean = std::max({err_clean, std::abs(clean.a.exponent - a), std::abs(clean.b.exponent - b)});
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto noisy = chinchilla_fit(oracle::synthetic_frontier(a, b, 0.02, seed));
        err_noisy = std::max({err_noisy, std::abs(noisy.a.exponent - a), std::abs(noisy.b.exponent - b)});
      }
    }
    const auto pw = piecewise_loss_fit(oracle::two_slope_frontier(-0.23, -0.12, 0.14), 0.14);
    const double err_pw = std::max(std::abs(pw.above.exponent + 0.23), std::abs(pw.below.exponent + 0.12));
    return Outcome{err_clean <= 1e-6 && err_noisy <= 0.03 && err_pw <= 1e-3 && !pw.fallback,
                   fmt::format("noiseless {:.1e}, 2% noise {:.4f} (10 seeds), piecewise ({:.5f}, {:.5f}) err {:.1e}",
                               err_clean, err_noisy, pw.above.exponent, pw.below.exponent, err_pw)};
  });
  check("pareto_oracle", [] {
    std::size_t mismatches = 0, points = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto [recs, grid] = oracle::random_pareto_case(seed);
      const auto fast = pareto_frontier(recs, grid);
      const auto slow = pareto_frontier_reference(recs, grid);
      points += slow.size();
      if (fast != slow) ++mismatches;
    }
    return Outcome{mismatches == 0, fmt::format("100 random logs, {} frontier points, {} mismatches", points, mismatches)};
  });
}

void bench_structure() {
  check("bench_structure", [] {
    const fs::path configs = SVSM_CONFIG_DIR;
    const auto svsm_cfg = load_experiment_config(configs / "bench_svsm.json");
    const auto lvsm_cfg = load_experiment_config(configs / "bench_lvsm.json");
    const std::uint64_t h = svsm_cfg.data.height, w = svsm_cfg.data.width;

    bool exact = true;
    const auto s_ref = decode_flops(svsm_cfg.model, 2, 1, h, w).mlp_proj;
    const auto l_unit = decode_flops(lvsm_cfg.model, 1, 1, h, w).mlp_proj / 2;
    for (std::uint64_t vc = 1; vc <= 16; ++vc) {
      exact = exact && decode_flops(svsm_cfg.model, vc, 1, h, w).mlp_proj == s_ref;
      exact = exact && decode_flops(lvsm_cfg.model, vc, 1, h, w).mlp_proj == l_unit * (vc + 1);
    }

    BenchOptions opt;
    opt.batch = 8;
    opt.iterations = 40;
    Model<float> svsm(svsm_cfg.model, h, w, 1), lvsm(lvsm_cfg.model, h, w, 1);
    const auto s2 = bench_render(svsm, 2, opt), s8 = bench_render(svsm, 8, opt);
    const auto l2 = bench_render(lvsm, 2, opt), l8 = bench_render(lvsm, 8, opt);
    const double rs = s8.fps / s2.fps, rl = l8.fps / l2.fps;
    return Outcome{exact && rs >= 0.75 && rl <= 0.5,
                   fmt::format("flops exact: {}; SVSM fps {:.1f} -> {:.1f} (x{:.2f}); LVSM fps {:.1f} -> {:.1f} (x{:.2f})",
                               exact ? "yes" : "no", s2.fps, s8.fps, rs, l2.fps, l8.fps, rl)};
  });
}

void dataset_integrity(const fs::path& work) {
  check("dataset_integrity", [&] {
    DatasetSpec spec;
    spec.seed = 11;
    spec.scenes = 8;
    spec.trajectory = trajectory_preset("multiview");
    const auto data = generate_dataset(spec);
    fs::create_directories(work);
    const auto path = work / fmt::format("dataset_{}.bin", ::getpid());
    write_dataset(path, data);
    const auto back = read_dataset(path);
    fs::remove(path);
    std::size_t bad_io = 0, bad_render = 0;
    if (back.views.size() != data.views.size()) return Outcome{false, "frame count differs after read"};
    for (std::size_t i = 0; i < data.views.size(); ++i)
      if (!bit_equal(back.views[i].image, data.views[i].image) ||
          back.views[i].pose.matrix() != data.views[i].pose.matrix() ||
          back.views[i].intrinsics.fx != data.views[i].intrinsics.fx ||
          back.views[i].intrinsics.fy != data.views[i].intrinsics.fy ||
          back.views[i].intrinsics.cx != data.views[i].intrinsics.cx ||
          back.views[i].intrinsics.cy != data.views[i].intrinsics.cy)
        ++bad_io;
    for (std::uint32_t s = 0; s < back.scenes; ++s) {
      const auto scene = generate_scene(scene_seed(spec.seed, s));
      for (std::uint32_t f = 0; f < back.frames; ++f) {
        const auto& v = back.view(s, f);
        if (!bit_equal(render_view(scene, v.pose, v.intrinsics, back.height, back.width), v.image)) ++bad_render;
      }
    }
    return Outcome{bad_io == 0 && bad_render == 0,
                   fmt::format("{} frames: {} round-trip mismatches, {} re-render mismatches", back.views.size(),
                               bad_io, bad_render)};
  });
}

// ---------------------------------------------------------------------------------------------

std::vector<RunLogRecord> sweep_records(const std::string& config, const fs::path& work) {
  const auto sweep = load_sweep_config(fs::path(SVSM_CONFIG_DIR) / config);
  SweepOptions opt;
  opt.out_dir = work / sweep.name;
  const auto summary = run_sweep(sweep, opt);
  std::cout << fmt::format("  sweep {}: {} trained, {} reused, {} failed", sweep.name, summary.completed.size(),
                           summary.skipped.size(), summary.failed.size())
            << std::endl;
  if (!summary.failed.empty()) throw NumericalError("run " + summary.failed.front().first + " failed: " + summary.failed.front().second);
  return read_run_log(summary.merged_log);
}

void effective_batch(const fs::path& work) {
  check("effective_batch", [&] {
    const auto records = sweep_records("effective_batch.json", work);
    const auto runs = group_runs(records);
    const auto report = effective_batch_report(runs);
    std::string detail;
    for (const auto& g : report.groups) {
      detail += fmt::format("B_eff={}: mean {:.3f} dB spread {:.3f} (", g.b_eff, g.mean_psnr, g.psnr_spread);
      for (std::size_t i = 0; i < g.runs.size(); ++i)
        detail += fmt::format("{}{}x{} {:.3f}", i ? ", " : "", g.runs[i].shape.batch, g.runs[i].shape.target_views,
                              g.runs[i].final_psnr);
      detail += "); ";
    }
    detail += fmt::format("max within {:.3f} dB, min across gap {:.3f} dB", report.max_within_spread, report.min_across_gap);
    const bool grouped = report.groups.size() >= 2;
    return Outcome{grouped && report.max_within_spread <= 0.5 && report.max_within_spread < report.min_across_gap,
                   detail};
  });
}

void compute_advantage(const fs::path& work) {
  check("compute_advantage", [&] {
    const auto records = sweep_records("compute_advantage.json", work);
    std::vector<RunLogRecord> svsm, lvsm;
    for (const auto& r : records) (r.family == "lvsm_dec" ? lvsm : svsm).push_back(r);
    if (svsm.empty() || lvsm.empty()) return Outcome{false, "one family has no records"};
    auto span_of = [](const std::vector<RunLogRecord>& rs) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0;
      for (const auto& r : rs)
        if (std::isfinite(r.eval_loss)) lo = std::min(lo, r.flops), hi = std::max(hi, r.flops);
      return std::pair(lo, hi);
    };
    const auto [s_lo, s_hi] = span_of(svsm);
    const auto [l_lo, l_hi] = span_of(lvsm);
    const double lo = std::max(s_lo, l_lo), hi = std::min(s_hi, l_hi);
    std::vector<double> grid;
    for (double g : budget_grid(records, 8))
      if (g >= lo && g <= hi) grid.push_back(g);
    if (grid.size() < 4) return Outcome{false, fmt::format("only {} budgets in the overlap", grid.size())};
    const auto fs_ = pareto_frontier(svsm, grid), fl = pareto_frontier(lvsm, grid);
    std::size_t wins = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) wins += fs_[i].loss <= fl[i].loss;
    const double frac = double(wins) / double(grid.size());
    return Outcome{frac >= 0.75,
                   fmt::format("SVSM frontier <= LVSM at {}/{} budgets ({:.0f}%) over [{:.2e}, {:.2e}]; "
                               "final frontier {:.5f} vs {:.5f}",
                               wins, grid.size(), 100 * frac, grid.front(), grid.back(), fs_.back().loss,
                               fl.back().loss)};
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"svsmlab acceptance checks"};
  std::string group = "fast";
  fs::path work = fs::temp_directory_path() / "svsm_acceptance";
  app.add_option("--group", group, "fast, effective-batch, compute-advantage or all")
      ->check(CLI::IsMember({"fast", "effective-batch", "compute-advantage", "all"}));
  app.add_option("--work-dir", work, "Directory for sweep outputs (reused across invocations)");
  CLI11_PARSE(app, argc, argv);

  const bool all = group == "all";
  if (all || group == "fast") {
    flop_ratios();
    gradient_suite();
    prope_invariance();
    decode_independence();
    scaling_fit();
    bench_structure();
    dataset_integrity(work);
  }
  if (all || group == "effective-batch") effective_batch(work);
  if (all || group == "compute-advantage") compute_advantage(work);
  std::cout << (failures ? fmt::format("{} criteria failed", failures) : std::string("all criteria passed"))
            << std::endl;
  return failures ? 1 : 0;
}
