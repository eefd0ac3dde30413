// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/harness/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "svsm/errors.hpp"
#include "svsm/flops/flops.hpp"
#include "svsm/harness/metrics.hpp"
#include "svsm/models/loss.hpp"
#include "svsm/tensor/checkpoint.hpp"
#include "svsm/tensor/optim.hpp"
#include "svsm/util/log.hpp"
#include "svsm/util/random.hpp"

namespace svsm {

EpisodeSource::EpisodeSource(Dataset data, std::size_t window) : data_(std::move(data)), window_(window) {
  if (data_.scenes == 0 || data_.frames == 0) throw ConfigError("episode source needs a non-empty dataset");
}

Episode EpisodeSource::episode(std::size_t scene, std::size_t context_views, std::size_t target_views,
                               Rng& rng) const {
  Episode ep;
  ep.scene_id = scene;
  ep.indices = sample_frame_indices(data_.frames, window_, context_views, target_views, rng);
  for (auto f : ep.indices.context) ep.context.push_back(data_.view(scene, f));
  for (auto f : ep.indices.target) ep.target.push_back(data_.view(scene, f));
  return ep;
}

Episode EpisodeSource::sample(std::size_t context_views, std::size_t target_views, Rng& rng) const {
  const auto scene = static_cast<std::size_t>(rng.uniform_int(0, std::int64_t(data_.scenes) - 1));
  return episode(scene, context_views, target_views, rng);
}

Dataset training_dataset(const ExperimentConfig& c) {
  if (c.data.path.empty()) return generate_dataset(c.data.dataset_spec());
  Dataset d = read_dataset(c.data.path);
  if (d.height != c.data.height || d.width != c.data.width)
    throw ConfigError("dataset " + c.data.path + " is " + std::to_string(d.height) + "x" + std::to_string(d.width) +
                      " but the config asks for " + std::to_string(c.data.height) + "x" +
                      std::to_string(c.data.width));
  return d;
}

void check_held_out_disjoint(const ExperimentConfig& c) {
  std::set<std::uint64_t> train;
  for (std::uint32_t i = 0; i < c.data.scenes; ++i) train.insert(scene_seed(c.data.seed, i, false));
  for (std::size_t i = 0; i < c.eval_scene_count; ++i)
    if (train.count(scene_seed(c.data.seed, i, true)))
      throw Error("held-out scene " + std::to_string(i) + " shares its seed with a training scene");
}

std::vector<Episode> evaluation_episodes(const ExperimentConfig& c) {
  DatasetSpec spec = c.data.dataset_spec();
  spec.scenes = static_cast<std::uint32_t>(c.eval_scene_count);
  EpisodeSource source(generate_dataset(spec, true), spec.trajectory.window);
  Rng rng(mix_seed(c.data.seed, 0xE7A1E7A1ULL));
  std::vector<Episode> out;
  for (std::size_t s = 0; s < c.eval_scene_count; ++s)
    out.push_back(source.episode(s, c.context_views, c.eval_target_views, rng));
  return out;
}

template <typename T>
EvalMetrics evaluate(const Model<T>& model, std::span<const Episode> episodes, double perceptual_weight) {
  if (episodes.empty()) throw UsageError("evaluation needs at least one episode");
  EvalMetrics m;
  std::size_t images = 0;
  const std::size_t h = model.height(), w = model.width();
  for (const auto& ep : episodes) {
    Tape<T> tape(false);
    std::span<const Episode> one(&ep, 1);
    auto pred = model.forward(tape, one);
    auto gt = tape.constant(model.target_images(one));
    m.loss += double(training_loss(pred, gt, perceptual_weight).value().item()) * double(ep.target.size());
    const auto& p = pred.value();
    const auto& g = gt.value();
    for (std::size_t t = 0; t < ep.target.size(); ++t) {
      Tensor<T> a({h, w, 3}), b({h, w, 3});
      std::copy_n(p.ptr() + t * h * w * 3, h * w * 3, a.ptr());
      std::copy_n(g.ptr() + t * h * w * 3, h * w * 3, b.ptr());
      const double mse = image_mse(a, b);
      m.mse += mse;
      m.psnr += psnr_from_mse(mse);
      m.ssim += ssim(a, b);
      ++images;
    }
  }
  m.loss /= double(images);
  m.mse /= double(images);
  m.psnr /= double(images);
  m.ssim /= double(images);
  return m;
}

template EvalMetrics evaluate(const Model<float>&, std::span<const Episode>, double);
template EvalMetrics evaluate(const Model<double>&, std::span<const Episode>, double);

template <typename T>
void save_model(const std::filesystem::path& path, const Model<T>& model, const ExperimentConfig& config) {
  std::vector<NamedTensor<float>> state;
  for (const auto& nt : model.state_dict()) state.push_back({nt.name, nt.tensor.template cast<float>()});
  save_checkpoint(path, state);
  const auto meta = std::filesystem::path(path.string() + ".json");
  const auto tmp = std::filesystem::path(meta.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::trunc);
    os << to_json(config).dump(2) << '\n';
    os.flush();
    if (!os) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, meta);
}

template void save_model(const std::filesystem::path&, const Model<float>&, const ExperimentConfig&);
template void save_model(const std::filesystem::path&, const Model<double>&, const ExperimentConfig&);

LoadedModel load_model(const std::filesystem::path& path) {
  LoadedModel out;
  out.config = load_experiment_config(path.string() + ".json");
  out.model = std::make_unique<Model<float>>(out.config.model, out.config.data.height, out.config.data.width, 0);
  out.model->load_state_dict(load_checkpoint<float>(path));
  return out;
}

namespace {

template <typename T>
TrainResult train_impl(const ExperimentConfig& c, const TrainOptions& options) {
  c.validate();
  check_held_out_disjoint(c);
  const auto start = std::chrono::steady_clock::now();
  auto log = logger();

  EpisodeSource source(training_dataset(c), c.data.dataset_spec().trajectory.window);
  const auto eval_set = evaluation_episodes(c);
  const std::size_t h = c.data.height, w = c.data.width;

  Model<T> model(c.model, h, w, mix_seed(c.seed, 0x3D0E1ULL));
  AdamWConfig opt_cfg;
  opt_cfg.peak_lr = c.optimizer.peak_lr;
  opt_cfg.beta1 = c.optimizer.beta1;
  opt_cfg.beta2 = c.optimizer.beta2;
  opt_cfg.weight_decay = c.optimizer.weight_decay;
  opt_cfg.eps = c.optimizer.eps;
  opt_cfg.warmup_steps = c.optimizer.warmup_for(c.steps);
  AdamW<T> opt(opt_cfg, model.parameters());
  Rng rng(mix_seed(c.seed, 0xDA7AULL));

  TrainResult result;
  result.parameters = param_count(c.model);
  log->info("{}: {} {} parameters, B={} V_C={} V_T={}, {} steps", c.run_id, to_string(c.model.family),
            result.parameters, c.batch, c.context_views, c.target_views, c.steps);

  auto make_record = [&](std::uint64_t step, double train_loss, const EvalMetrics& e) {
    RunLogRecord r;
    r.run_id = c.run_id;
    r.family = to_string(c.model.family);
    r.N = result.parameters;
    r.step = step;
    r.D = std::uint64_t(c.batch) * c.target_views * step;
    r.flops = to_double(train_flops(c.model, c.context_views, c.target_views, c.batch, step, h, w,
                                    c.backward_multiplier, FlopMode::paper_constant));
    r.train_loss = train_loss;
    r.eval_loss = e.loss;
    r.eval_psnr = e.psnr;
    r.eval_ssim = e.ssim;
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.records.push_back(r);
    if (options.on_record) options.on_record(r);
    return r;
  };

  double loss_sum = 0.0;
  std::uint64_t loss_count = 0;
  std::vector<Episode> batch(c.batch);
  for (std::uint64_t step = 1; step <= c.steps; ++step) {
    for (auto& ep : batch) ep = source.sample(c.context_views, c.target_views, rng);
    Tape<T> tape;
    auto pred = model.forward(tape, batch);
    auto loss = training_loss(pred, tape.constant(model.target_images(batch)), c.perceptual_weight);
    const double value = double(loss.value().item());
    if (!std::isfinite(value)) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      make_record(step, value, EvalMetrics{nan, nan, nan, nan});
      throw NumericalError(c.run_id + ": non-finite training loss at step " + std::to_string(step));
    }
    auto grads = tape.backward(loss);
    opt.step(grads, lr_at_step(step, c.optimizer.peak_lr, opt_cfg.warmup_steps, c.steps));
    loss_sum += value;
    ++loss_count;

    if (step % c.eval_every == 0 || step == c.steps) {
      result.final_eval = evaluate(model, eval_set, c.perceptual_weight);
      const auto r = make_record(step, loss_sum / double(loss_count), result.final_eval);
      loss_sum = 0.0;
      loss_count = 0;
      log->debug("{} step {}: train {:.5f} eval {:.5f} psnr {:.2f}", c.run_id, step, r.train_loss, r.eval_loss,
                 r.eval_psnr);
    }
  }
  if (!options.checkpoint.empty()) {
    try {
      save_model(options.checkpoint, model, c);
    } catch (const std::exception& e) {
      throw Error(c.run_id + ": checkpoint failed (run log is complete): " + e.what());
    }
  }
  return result;
}

}  // namespace

TrainResult train_run(const ExperimentConfig& config, const TrainOptions& options) {
  return config.precision == Precision::float64 ? train_impl<double>(config, options)
                                                : train_impl<float>(config, options);
}

}  // namespace svsm
