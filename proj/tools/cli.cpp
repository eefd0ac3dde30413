// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "svsm/errors.hpp"
#include "svsm/flops/flops.hpp"
#include "svsm/harness/bench.hpp"
#include "svsm/harness/config.hpp"
#include "svsm/harness/metrics.hpp"
#include "svsm/harness/sweep.hpp"
#include "svsm/harness/train.hpp"
#include "svsm/scaling/export.hpp"
#include "svsm/scenegen/dataset.hpp"
#include "svsm/tensor/checkpoint.hpp"
#include "svsm/util/image_io.hpp"
#include "svsm/util/log.hpp"
#include "svsm/util/random.hpp"

namespace svsm::cli {
namespace {

namespace fs = std::filesystem;

struct Flags {
  // shared
  std::string config, out, log, checkpoint, csv, out_dir, run_id;
  std::optional<std::uint64_t> seed, steps;
  // gen-data
  bool held_out = false;
  // sweep
  std::size_t workers = 0;
  bool checkpoints = false;
  // flops
  std::string family = "svsm", mode = "paper";
  std::size_t vc = 2, vt = 6, dim = 64, layers = 2, res = 32, patch = 8, batch = 1, latents = 0;
  std::optional<std::size_t> enc_layers, dec_layers;
  std::uint64_t flop_steps = 1, backward_multiplier = kDefaultBackwardMultiplier;
  // fit-laws, effective-batch
  double split = kDefaultLossSplit;
  std::size_t points_per_decade = 8, window = kDefaultSmoothingWindow;
  // bench-render
  std::vector<std::size_t> bench_vc{2, 8};
  std::size_t bench_batch = 8, bench_vt = 1, warmup = 5, iterations = 20;
  // render
  std::size_t scene = 0;
  std::optional<std::size_t> render_vc, render_vt;
};

std::string count(FlopCount v) { return to_string(v); }

void gen_data(const Flags& f, std::ostream& out) {
  const auto c = load_experiment_config(f.config);
  auto spec = c.data.dataset_spec();
  if (f.seed) spec.seed = *f.seed;
  const Dataset d = generate_dataset(spec, f.held_out);
  write_dataset(f.out, d);
  out << fmt::format("wrote {} scenes x {} frames at {}x{} to {}\n", d.scenes, d.frames, d.height, d.width, f.out);
}

void train(const Flags& f, std::ostream& out) {
  auto c = load_experiment_config(f.config);
  if (!f.run_id.empty()) c.run_id = f.run_id;
  if (f.seed) c.seed = *f.seed;
  if (f.steps) c.steps = *f.steps;
  c.validate();
  const fs::path log = f.log;
  const fs::path partial = log.string() + ".partial";
  if (log.has_parent_path()) fs::create_directories(log.parent_path());
  std::ofstream os(partial, std::ios::trunc);
  if (!os) throw UsageError("cannot write run log " + partial.string());
  TrainOptions opt;
  opt.on_record = [&](const RunLogRecord& r) {
    os << to_jsonl_line(r) << '\n';
    os.flush();
  };
  opt.checkpoint = f.checkpoint;
  TrainResult result;
  try {
    result = train_run(c, opt);
  } catch (...) {
    os.close();
    fs::rename(partial, log);  // keep the diagnostic records
    throw;
  }
  os.close();
  fs::rename(partial, log);
  const auto& e = result.final_eval;
  out << fmt::format("{}: {} records, N={}, eval loss {:.5f}, PSNR {:.2f} dB, SSIM {:.4f}\n", c.run_id,
                     result.records.size(), result.parameters, e.loss, e.psnr, e.ssim);
}

int sweep(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto s = load_sweep_config(f.config);
  SweepOptions opt;
  opt.out_dir = f.out;
  opt.merged_log = f.log;
  opt.workers = f.workers;
  opt.checkpoints = f.checkpoints;
  const auto summary = run_sweep(s, opt);
  out << fmt::format("{}: {} completed, {} skipped, {} failed; {} records in {}\n", s.name, summary.completed.size(),
                     summary.skipped.size(), summary.failed.size(), summary.records, summary.merged_log.string());
  for (const auto& [id, why] : summary.failed) err << "failed: " << id << ": " << why << '\n';
  return summary.failed.empty() ? kExitOk : kExitUser;
}

void flops(const Flags& f, std::ostream& out) {
  ModelConfig c;
  c.family = parse_family(f.family);
  c.enc_dim = c.dec_dim = f.dim;
  c.enc_layers = f.enc_layers.value_or(f.layers);
  c.dec_layers = f.dec_layers.value_or(f.layers);
  c.patch_size = f.patch;
  c.head_dim = f.dim % 16 == 0 ? 16 : f.dim;
  c.fixed_latent_tokens = f.latents;
  if (has_fixed_latent(c.family) && c.fixed_latent_tokens == 0)
    throw ConfigError("--latents is required for " + to_string(c.family));
  c.validate();
  c.validate_resolution(f.res, f.res);
  const FlopMode mode = parse_flop_mode(f.mode);
  const auto fwd = forward_flops(c, f.vc, f.vt, f.res, f.res, mode);
  const auto dec = decode_flops(c, f.vc, f.vt, f.res, f.res, mode);
  const auto trn = train_flops(c, f.vc, f.vt, f.batch, f.flop_steps, f.res, f.res, f.backward_multiplier, mode);
  const auto tok = token_counts(f.vc, f.vt, f.res, f.res, f.patch);

  out << fmt::format("{} V_C={} V_T={} d={} layers={}/{} {}x{} patch {} ({} tokens/view), {} mode\n",
                     to_string(c.family), f.vc, f.vt, f.dim, c.enc_layers, c.dec_layers, f.res, f.res, f.patch,
                     tok.per_view, to_string(mode));
  out << fmt::format("{:<10} {:>16} {:>16} {:>16}\n", "component", "attention", "mlp_proj", "total");
  out << fmt::format("{:<10} {:>16} {:>16} {:>16}\n", "forward", count(fwd.attn), count(fwd.mlp_proj),
                     count(fwd.total()));
  out << fmt::format("{:<10} {:>16} {:>16} {:>16}\n", "decode", count(dec.attn), count(dec.mlp_proj),
                     count(dec.total()));
  out << fmt::format("{:<10} {:>16} {:>16} {:>16}  (B={}, steps={}, x{})\n", "train", "", "", count(trn), f.batch,
                     f.flop_steps, f.backward_multiplier);

  std::ostringstream csv;
  csv << "family,mode,V_C,V_T,dim,enc_layers,dec_layers,res,patch,component,attention,mlp_proj,total\n";
  const std::string prefix = fmt::format("{},{},{},{},{},{},{},{},{}", to_string(c.family), to_string(mode), f.vc,
                                         f.vt, f.dim, c.enc_layers, c.dec_layers, f.res, f.patch);
  csv << prefix << ",forward," << count(fwd.attn) << ',' << count(fwd.mlp_proj) << ',' << count(fwd.total()) << '\n';
  csv << prefix << ",decode," << count(dec.attn) << ',' << count(dec.mlp_proj) << ',' << count(dec.total()) << '\n';
  csv << prefix << ",train,,," << count(trn) << '\n';
  out << '\n' << csv.str();
  if (!f.csv.empty()) write_text_atomic(f.csv, csv.str());
}

void fit_laws(const Flags& f, std::ostream& out) {
  const auto records = read_run_log(fs::path(f.log));
  const auto laws = analyze_scaling(records, f.split, f.points_per_decade);
  out << format_laws_summary(laws);
  if (!f.out_dir.empty()) {
    fs::create_directories(f.out_dir);
    std::ostringstream frontier, fits;
    write_frontier_csv(frontier, laws);
    write_fits_csv(fits, laws);
    write_text_atomic(fs::path(f.out_dir) / "frontier.csv", frontier.str());
    write_text_atomic(fs::path(f.out_dir) / "fits.csv", fits.str());
  }
}

void effective_batch(const Flags& f, std::ostream& out) {
  const auto records = read_run_log(fs::path(f.log));
  const auto runs = group_runs(records);
  const auto report = effective_batch_report(runs, f.window);
  out << format_effective_batch_summary(report);
  if (!f.out_dir.empty()) {
    fs::create_directories(f.out_dir);
    std::ostringstream curves, summary;
    write_curves_csv(curves, runs, f.window);
    write_effective_batch_csv(summary, report);
    write_text_atomic(fs::path(f.out_dir) / "curves.csv", curves.str());
    write_text_atomic(fs::path(f.out_dir) / "effective_batch.csv", summary.str());
  }
}

void bench(const Flags& f, std::ostream& out) {
  const auto c = load_experiment_config(f.config);
  c.model.validate();
  c.model.validate_resolution(c.data.height, c.data.width);
  Model<float> model(c.model, c.data.height, c.data.width, mix_seed(c.seed, 0x3D0E1ULL));
  if (!f.checkpoint.empty()) model.load_state_dict(load_checkpoint<float>(f.checkpoint));
  BenchOptions opt;
  opt.batch = f.bench_batch;
  opt.target_views = f.bench_vt;
  opt.warmup = f.warmup;
  opt.iterations = f.iterations;
  opt.seed = c.seed;
  opt.trajectory = c.data.trajectory;

  std::ostringstream csv;
  csv << "family,V_C,B,V_T,t_iter,t_iter_std,fps,decode_flops_per_frame,unstable\n";
  out << fmt::format("{:<12} {:>4} {:>4} {:>4} {:>12} {:>10} {:>10} {:>18}\n", "family", "V_C", "B", "V_T",
                     "t_iter[s]", "std[s]", "FPS", "flops/frame");
  for (std::size_t vc : f.bench_vc) {
    const auto r = bench_render(model, vc, opt);
    const FlopCount per_frame =
        decode_flops(c.model, vc, f.bench_vt, c.data.height, c.data.width).total() / FlopCount(f.bench_vt);
    out << fmt::format("{:<12} {:>4} {:>4} {:>4} {:>12.6f} {:>10.6f} {:>10.2f} {:>18}{}\n", r.family, vc, r.batch,
                       r.target_views, r.mean_t_iter, r.std_t_iter, r.fps, count(per_frame),
                       r.unstable ? "  unstable" : "");
    csv << fmt::format("{},{},{},{},{},{},{},{},{}\n", r.family, vc, r.batch, r.target_views, r.mean_t_iter,
                       r.std_t_iter, r.fps, count(per_frame), r.unstable ? 1 : 0);
  }
  if (!f.csv.empty()) write_text_atomic(f.csv, csv.str());
}

void render(const Flags& f, std::ostream& out) {
  const auto loaded = load_model(f.checkpoint);
  auto c = loaded.config;
  if (f.render_vc) c.context_views = *f.render_vc;
  if (f.render_vt) c.eval_target_views = *f.render_vt;
  c.eval_scene_count = f.scene + 1;
  c.validate();
  const auto episodes = evaluation_episodes(c);
  const Episode& ep = episodes.back();
  std::vector<Camera> cams;
  for (const auto& v : ep.target) cams.push_back({v.pose, v.intrinsics});
  const auto images = loaded.model->render(ep.context, cams);
  fs::create_directories(f.out);
  for (std::size_t i = 0; i < images.size(); ++i) {
    write_png(fs::path(f.out) / fmt::format("pred_{:02}.png", i), images[i]);
    write_png(fs::path(f.out) / fmt::format("gt_{:02}.png", i), ep.target[i].image);
    const double mse = image_mse(images[i], ep.target[i].image);
    out << fmt::format("view {}: PSNR {:.2f} dB, SSIM {:.4f}\n", i, psnr_from_mse(mse),
                       ssim(images[i], ep.target[i].image));
  }
}

std::unique_ptr<CLI::App> build_app(std::ostream& out, std::ostream& err, const std::shared_ptr<int>& status) {
  auto app = std::make_unique<CLI::App>("Scaling experiments for view synthesis transformers.", "svsm");
  app->require_subcommand(1, 1);
  app->set_version_flag("--version", "svsm 0.1.0");
  auto f = std::make_shared<Flags>();

  auto* g = app->add_subcommand("gen-data", "Render a synthetic dataset file from an experiment config.");
  g->add_option("--config", f->config, "Experiment config (its data section is used)")->required();
  g->add_option("--out", f->out, "Dataset file to write")->required();
  g->add_option("--seed", f->seed, "Override data.seed");
  g->add_flag("--held-out", f->held_out, "Draw scenes from the held-out seed stream");
  g->callback([f, &out] { gen_data(*f, out); });

  auto* t = app->add_subcommand("train", "Train one experiment config and write its run log.");
  t->add_option("--config", f->config, "Experiment config")->required();
  t->add_option("--log", f->log, "Run log (JSONL) to write")->required();
  t->add_option("--checkpoint", f->checkpoint, "Final checkpoint path (config saved next to it as .json)");
  t->add_option("--run-id", f->run_id, "Override run_id");
  t->add_option("--seed", f->seed, "Override seed");
  t->add_option("--steps", f->steps, "Override steps");
  t->callback([f, &out] { train(*f, out); });

  auto* s = app->add_subcommand("sweep", "Run a sweep grid; completed runs are skipped.");
  s->add_option("--config", f->config, "Sweep config")->required();
  s->add_option("--out", f->out, "Sweep directory (per-run logs under runs/)")->required();
  s->add_option("--log", f->log, "Merged run log (default <out>/<name>.jsonl)");
  s->add_option("--workers", f->workers, "Parallel runs (default from config)");
  s->add_flag("--checkpoints", f->checkpoints, "Save a checkpoint per run under <out>/checkpoints");
  s->callback([f, status, &out, &err] { *status = sweep(*f, out, err); });

  auto* fl = app->add_subcommand("flops", "Print the FLOP breakdown for one model and view configuration.");
  fl->add_option("--family", f->family, "lvsm, svsm, svsm_fixed or lvsm_encdec")->capture_default_str();
  fl->add_option("--vc", f->vc, "Context views")->capture_default_str();
  fl->add_option("--vt", f->vt, "Target views")->capture_default_str();
  fl->add_option("--dim", f->dim, "Model width")->capture_default_str();
  fl->add_option("--layers", f->layers, "Layers per stack")->capture_default_str();
  fl->add_option("--enc-layers", f->enc_layers, "Encoder layers (default --layers)");
  fl->add_option("--dec-layers", f->dec_layers, "Decoder layers (default --layers)");
  fl->add_option("--latents", f->latents, "Fixed latent tokens (fixed-latent families)");
  fl->add_option("--res", f->res, "Square image side in pixels")->capture_default_str();
  fl->add_option("--patch", f->patch, "Patch size")->capture_default_str();
  fl->add_option("--batch", f->batch, "Scenes per step for the train total")->capture_default_str();
  fl->add_option("--steps", f->flop_steps, "Steps for the train total")->capture_default_str();
  fl->add_option("--backward-multiplier", f->backward_multiplier, "Train/forward cost ratio")->capture_default_str();
  fl->add_option("--mode", f->mode, "paper or exact")->capture_default_str();
  fl->add_option("--csv", f->csv, "Also write the CSV rows to this file");
  fl->callback([f, &out] { flops(*f, out); });

  auto* fit = app->add_subcommand("fit-laws", "Fit frontier and allocation laws to a run log.");
  fit->add_option("--log", f->log, "Run log (JSONL)")->required();
  fit->add_option("--out-dir", f->out_dir, "Write frontier.csv and fits.csv here");
  fit->add_option("--split", f->split, "Loss value separating the two piecewise regimes")->capture_default_str();
  fit->add_option("--points-per-decade", f->points_per_decade, "Budget grid density")->capture_default_str();
  fit->callback([f, &out] { fit_laws(*f, out); });

  auto* eb = app->add_subcommand("effective-batch", "Group runs by B*V_T and compare their curves.");
  eb->add_option("--log", f->log, "Run log (JSONL)")->required();
  eb->add_option("--window", f->window, "Smoothing window in records")->capture_default_str();
  eb->add_option("--out-dir", f->out_dir, "Write curves.csv and effective_batch.csv here");
  eb->callback([f, &out] { effective_batch(*f, out); });

  auto* b = app->add_subcommand("bench-render", "Time rendering per batch and report FPS.");
  b->add_option("--config", f->config, "Experiment config (model and resolution)")->required();
  b->add_option("--checkpoint", f->checkpoint, "Load weights before timing");
  b->add_option("--vc", f->bench_vc, "Context view counts")->delimiter(',')->capture_default_str();
  b->add_option("--batch", f->bench_batch, "Scenes per iteration")->capture_default_str();
  b->add_option("--vt", f->bench_vt, "Target views per scene")->capture_default_str();
  b->add_option("--warmup", f->warmup, "Untimed iterations (at least 5)")->capture_default_str();
  b->add_option("--iterations", f->iterations, "Timed iterations (at least 20)")->capture_default_str();
  b->add_option("--csv", f->csv, "Also write results to this CSV file");
  b->callback([f, &out] { bench(*f, out); });

  auto* r = app->add_subcommand("render", "Render held-out target views from a checkpoint to PNG.");
  r->add_option("--checkpoint", f->checkpoint, "Checkpoint written by train")->required();
  r->add_option("--out", f->out, "Output directory for pred_NN.png and gt_NN.png")->required();
  r->add_option("--scene", f->scene, "Held-out scene index")->capture_default_str();
  r->add_option("--vc", f->render_vc, "Context views (default from the config)");
  r->add_option("--vt", f->render_vt, "Target views (default eval_target_views)");
  r->callback([f, &out] { render(*f, out); });

  app->set_help_all_flag("--help-all", "Help for every subcommand");
  return app;
}

}  // namespace

std::unique_ptr<CLI::App> make_app(std::ostream& out, std::ostream& err) {
  return build_app(out, err, std::make_shared<int>(kExitOk));
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto status = std::make_shared<int>(kExitOk);
  auto app = build_app(out, err, status);
  if (args.empty()) {
    err << app->help();
    return kExitUser;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app->parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app->help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << app->version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const CLI::App* sub = app->get_subcommands().empty() ? app.get() : app->get_subcommands().front();
    err << "run 'svsm " << (sub == app.get() ? std::string() : sub->get_name() + " ") << "--help' for usage\n";
    return kExitUser;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return *status;
}

}  // namespace svsm::cli
