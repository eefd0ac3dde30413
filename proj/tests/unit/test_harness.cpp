// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <unistd.h>

#include "svsm/errors.hpp"
#include "svsm/flops/flops.hpp"
#include "svsm/harness/bench.hpp"
#include "svsm/harness/config.hpp"
#include "svsm/harness/metrics.hpp"
#include "svsm/harness/sweep.hpp"
#include "svsm/harness/train.hpp"
#include "svsm/scenegen/dataset.hpp"
#include "svsm/util/image_io.hpp"
#include "svsm/util/log.hpp"
#include "svsm/util/random.hpp"

namespace svsm {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("svsm_harness_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ExperimentConfig small_run(Family family = Family::svsm_encdec) {
  ExperimentConfig c;
  c.run_id = "smoke";
  c.model.family = family;
  c.model.enc_dim = 16;
  c.model.dec_dim = 16;
  c.model.enc_layers = 1;
  c.model.dec_layers = 1;
  c.model.head_dim = 8;
  c.model.patch_size = 4;
  if (has_fixed_latent(family)) c.model.fixed_latent_tokens = 4;
  c.data.height = 8;
  c.data.width = 8;
  c.data.scenes = 16;
  c.batch = 4;
  c.context_views = 2;
  c.target_views = 2;
  c.steps = 20;
  c.eval_every = 10;
  c.eval_scene_count = 4;
  c.optimizer.peak_lr = 3e-3;
  return c;
}

Tensor<float> random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  Tensor<float> t({h, w, 3});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = float(rng.uniform01());
  return t;
}

// Metrics

TEST(Metrics, PsnrCapAndKnownValue) {
  EXPECT_EQ(psnr_from_mse(0.0), kPsnrCap);
  EXPECT_NEAR(psnr_from_mse(0.01), 20.0, 1e-12);
  EXPECT_NEAR(psnr_from_mse(1e-3), 30.0, 1e-12);
  EXPECT_EQ(psnr_from_mse(1e-20), kPsnrCap);
  EXPECT_TRUE(std::isnan(psnr_from_mse(std::numeric_limits<double>::quiet_NaN())));
}

TEST(Metrics, MseOfShiftedImage) {
  auto a = random_image(8, 8, 1);
  auto b = a;
  for (std::size_t i = 0; i < b.size(); ++i) b[i] += 0.1f;
  EXPECT_NEAR(image_mse(a, b), 0.01, 1e-7);
  EXPECT_EQ(image_mse(a, a), 0.0);
}

TEST(Metrics, SsimIdentityAndGray) {
  auto a = random_image(16, 16, 2);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-9);
  Tensor<float> gray({16, 16, 3});
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = 0.5f;
  const double s = ssim(a, gray);
  EXPECT_LT(s, 0.5);
  EXPECT_NEAR(ssim(a, gray), ssim(gray, a), 1e-12);
}

TEST(Metrics, SsimSmallImage) {
  auto a = random_image(4, 6, 3);
  auto b = random_image(4, 6, 4);
  const double s = ssim(a, b);
  EXPECT_GT(s, -1.0);
  EXPECT_LT(s, 1.0);
}

// Config

TEST(HarnessConfig, JsonRoundTrip) {
  auto c = small_run();
  c.effective_batch = 8;
  c.data.window = 10;
  c.optimizer.warmup_steps = 3;
  c.precision = Precision::float64;
  const auto back = experiment_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(HarnessConfig, RejectsUnknownKeysAndBadValues) {
  auto j = to_json(small_run());
  j["bogus"] = 1;
  EXPECT_THROW(experiment_config_from_json(j), ConfigError);
  j = to_json(small_run());
  j["batch"] = -1;
  EXPECT_THROW(experiment_config_from_json(j), ConfigError);
  j = to_json(small_run());
  j["optimizer"]["peak_lr"] = "fast";
  EXPECT_THROW(experiment_config_from_json(j), ConfigError);
}

TEST(HarnessConfig, ValidateRejectsInconsistentRuns) {
  auto c = small_run();
  c.effective_batch = 9;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_run();
  c.context_views = 40;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_run();
  c.optimizer.peak_lr = std::numeric_limits<double>::infinity();
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_run();
  c.run_id = "a/b";
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(small_run().validate());
}

TEST(HarnessConfig, WarmupFraction) {
  OptimizerConfig o;
  EXPECT_EQ(o.warmup_for(1000), 30u);
  o.warmup_steps = 7;
  EXPECT_EQ(o.warmup_for(1000), 7u);
}

TEST(HarnessConfig, JsonSyntaxErrorHasPosition) {
  auto dir = scratch("syntax");
  std::ofstream(dir / "bad.json") << "{\n  \"steps\": 3,\n  oops\n}\n";
  try {
    load_experiment_config(dir / "bad.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.json:3:"), std::string::npos) << e.what();
  }
  fs::remove_all(dir);
}

TEST(SweepConfigTest, ExpandsGridWithIds) {
  SweepConfig s;
  s.name = "grid";
  s.base = small_run();
  s.models = {{"a", small_run().model}, {"b", small_run(Family::lvsm_dec).model}};
  s.batches = {{4, 2}, {2, 4}};
  s.steps = {10};
  const auto runs = s.expand();
  ASSERT_EQ(runs.size(), 4u);
  std::set<std::string> ids;
  for (const auto& r : runs) {
    ids.insert(r.run_id);
    EXPECT_EQ(r.batch * r.target_views, 8u);
  }
  EXPECT_TRUE(ids.count("grid-a-b4-vt2-s10"));
  EXPECT_TRUE(ids.count("grid-b-b2-vt4-s10"));
  const auto back = sweep_config_from_json(to_json(s));
  EXPECT_EQ(to_json(back), to_json(s));
}

// Data

TEST(Training, HeldOutScenesAreDisjoint) {
  auto c = small_run();
  EXPECT_NO_THROW(check_held_out_disjoint(c));
  std::set<std::uint64_t> train_seeds;
  for (std::uint32_t i = 0; i < c.data.scenes; ++i) train_seeds.insert(scene_seed(c.data.seed, i));
  for (std::size_t i = 0; i < 1000; ++i) EXPECT_FALSE(train_seeds.count(scene_seed(c.data.seed, i, true)));
  const auto eval = evaluation_episodes(c);
  ASSERT_EQ(eval.size(), c.eval_scene_count);
  const auto again = evaluation_episodes(c);
  for (std::size_t i = 0; i < eval.size(); ++i) {
    EXPECT_EQ(eval[i].indices.target, again[i].indices.target);
    const auto x = eval[i].target[0].image.data(), y = again[i].target[0].image.data();
    EXPECT_TRUE(std::equal(x.begin(), x.end(), y.begin(), y.end()));
  }
}

// Training

TEST(Training, RecordsFollowScheduleAndAccounting) {
  auto c = small_run();
  c.steps = 25;
  std::vector<RunLogRecord> streamed;
  TrainOptions opt;
  opt.on_record = [&](const RunLogRecord& r) { streamed.push_back(r); };
  const auto result = train_run(c, opt);
  ASSERT_EQ(result.records.size(), 3u);
  EXPECT_EQ(streamed.size(), 3u);
  const std::uint64_t steps[] = {10, 20, 25};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& r = result.records[i];
    EXPECT_EQ(r.step, steps[i]);
    EXPECT_EQ(r.D, c.batch * c.target_views * r.step);
    EXPECT_EQ(r.flops, to_double(train_flops(c.model, c.context_views, c.target_views, c.batch, r.step, 8, 8)));
    EXPECT_EQ(r.N, param_count(c.model));
    EXPECT_EQ(r.family, "svsm_encdec");
    EXPECT_TRUE(std::isfinite(r.eval_psnr));
  }
  EXPECT_NO_THROW(validate_run_log(result.records));
}

TEST(Training, LossDecreasesOnSmokeRun) {
  auto c = small_run();
  c.steps = 200;
  c.eval_every = 20;
  const auto result = train_run(c);
  ASSERT_EQ(result.records.size(), 10u);
  EXPECT_LT(result.records.back().train_loss, result.records.front().train_loss);
  EXPECT_LT(result.records.back().eval_loss, result.records.front().eval_loss);
}

TEST(Training, Float64RunsAreBitIdentical) {
  auto c = small_run(Family::lvsm_dec);
  c.precision = Precision::float64;
  c.steps = 10;
  c.eval_every = 5;
  const auto a = train_run(c);
  const auto b = train_run(c);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].train_loss, b.records[i].train_loss);
    EXPECT_EQ(a.records[i].eval_loss, b.records[i].eval_loss);
    EXPECT_EQ(a.records[i].eval_ssim, b.records[i].eval_ssim);
  }
}

TEST(Training, NonFiniteLossAborts) {
  auto c = small_run();
  c.optimizer.peak_lr = 1e30;
  c.optimizer.warmup_steps = 0;
  c.steps = 20;
  std::vector<RunLogRecord> streamed;
  TrainOptions opt;
  opt.on_record = [&](const RunLogRecord& r) { streamed.push_back(r); };
  EXPECT_THROW(train_run(c, opt), NumericalError);
  ASSERT_FALSE(streamed.empty());
  EXPECT_TRUE(std::isnan(streamed.back().eval_loss));
  EXPECT_FALSE(std::isfinite(streamed.back().train_loss));
}

TEST(Training, CheckpointRoundTrip) {
  auto dir = scratch("ckpt");
  auto c = small_run();
  c.steps = 5;
  c.eval_every = 5;
  TrainOptions opt;
  opt.checkpoint = dir / "model.ckpt";
  train_run(c, opt);
  const auto loaded = load_model(opt.checkpoint);
  EXPECT_EQ(to_json(loaded.config), to_json(c));
  const auto eval = evaluation_episodes(c);
  const auto m = evaluate(*loaded.model, std::span<const Episode>(eval), c.perceptual_weight);
  EXPECT_TRUE(std::isfinite(m.psnr));
  fs::remove_all(dir);
}

// Sweep

SweepConfig tiny_sweep() {
  SweepConfig s;
  s.name = "tiny";
  s.base = small_run();
  s.base.steps = 4;
  s.base.eval_every = 2;
  s.models = {{"enc", small_run().model}, {"dec", small_run(Family::lvsm_dec).model}};
  s.batches = {{2, 2}, {1, 4}};
  s.steps = {4};
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

TEST(Sweep, RunsGridAndResumes) {
  auto dir = scratch("sweep");
  SweepOptions opt;
  opt.out_dir = dir;
  const auto first = run_sweep(tiny_sweep(), opt);
  EXPECT_EQ(first.completed.size(), 4u);
  EXPECT_TRUE(first.failed.empty());
  EXPECT_EQ(first.records, 8u);
  auto log = read_run_log(first.merged_log);
  for (std::size_t i = 1; i < log.size(); ++i)
    EXPECT_TRUE(log[i - 1].run_id < log[i].run_id ||
                (log[i - 1].run_id == log[i].run_id && log[i - 1].step < log[i].step));
  const auto before = slurp(first.merged_log);

  std::atomic<int> calls{0};
  opt.runner = [&](const ExperimentConfig& c, const TrainOptions& o) {
    ++calls;
    return train_run(c, o);
  };
  const auto second = run_sweep(tiny_sweep(), opt);
  EXPECT_EQ(calls.load(), 0);
  EXPECT_EQ(second.skipped.size(), 4u);
  EXPECT_EQ(slurp(second.merged_log), before);
  fs::remove_all(dir);
}

TEST(Sweep, FailedRunDoesNotStopOthersAndIsRetried) {
  auto dir = scratch("sweep_fail");
  SweepOptions opt;
  opt.out_dir = dir;
  opt.runner = [](const ExperimentConfig& c, const TrainOptions& o) {
    if (c.run_id == "tiny-dec-b1-vt4-s4") {
      RunLogRecord r;
      r.run_id = c.run_id;
      o.on_record(r);
      throw NumericalError("boom");
    }
    return train_run(c, o);
  };
  const auto s = run_sweep(tiny_sweep(), opt);
  ASSERT_EQ(s.failed.size(), 1u);
  EXPECT_EQ(s.failed[0].first, "tiny-dec-b1-vt4-s4");
  EXPECT_EQ(s.completed.size(), 3u);
  EXPECT_EQ(s.records, 6u);
  EXPECT_TRUE(fs::exists(dir / "runs" / "tiny-dec-b1-vt4-s4.jsonl.partial"));

  opt.runner = nullptr;
  const auto retry = run_sweep(tiny_sweep(), opt);
  EXPECT_EQ(retry.completed, std::vector<std::string>{"tiny-dec-b1-vt4-s4"});
  EXPECT_EQ(retry.records, 8u);
  fs::remove_all(dir);
}

TEST(Sweep, ParallelWorkersMatchSerial) {
  auto a = scratch("sweep_serial");
  auto b = scratch("sweep_parallel");
  SweepOptions opt;
  opt.out_dir = a;
  const auto serial = read_run_log(run_sweep(tiny_sweep(), opt).merged_log);
  opt.out_dir = b;
  opt.workers = 3;
  const auto parallel = read_run_log(run_sweep(tiny_sweep(), opt).merged_log);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].run_id, parallel[i].run_id);
    EXPECT_EQ(serial[i].train_loss, parallel[i].train_loss);
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

// Bench

TEST(Bench, FpsFormulaAndStructure) {
  EXPECT_DOUBLE_EQ(frames_per_second(8, 2, 0.5), 32.0);
  EXPECT_THROW(frames_per_second(1, 1, 0.0), DomainError);

  for (Family f : {Family::lvsm_dec, Family::svsm_encdec}) {
    Model<float> model(small_run(f).model, 8, 8, 1);
    BenchOptions opt;
    opt.batch = 2;
    const auto r = bench_render(model, 3, opt);
    EXPECT_EQ(r.family, to_string(f));
    EXPECT_EQ(r.iterations, 20u);
    EXPECT_GT(r.mean_t_iter, 0.0);
    EXPECT_NEAR(r.fps, 2.0 / r.mean_t_iter, 1e-9 * r.fps);
    EXPECT_EQ(r.unstable, r.std_t_iter > 0.2 * r.mean_t_iter);
  }
  Model<float> model(small_run().model, 8, 8, 1);
  BenchOptions few;
  few.iterations = 5;
  EXPECT_THROW(bench_render(model, 2, few), ConfigError);
}

// Utilities

TEST(ImageIo, PngRoundTripQuantizes) {
  auto dir = scratch("png");
  auto img = random_image(5, 7, 9);
  write_png(dir / "a.png", img);
  const auto back = read_png(dir / "a.png");
  ASSERT_EQ(back.shape(), img.shape());
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(back[i], img[i], 0.5 / 255.0 + 1e-6);
  std::ofstream(dir / "junk.png") << "not a png";
  EXPECT_THROW(read_png(dir / "junk.png"), FormatError);
  fs::remove_all(dir);
}

TEST(Log, ParsesLevels) {
  spdlog::level::level_enum lv;
  EXPECT_TRUE(parse_log_level("debug", lv));
  EXPECT_EQ(lv, spdlog::level::debug);
  EXPECT_TRUE(parse_log_level("error", lv));
  EXPECT_EQ(lv, spdlog::level::err);
  EXPECT_FALSE(parse_log_level("loud", lv));
}

}  // namespace
}  // namespace svsm
