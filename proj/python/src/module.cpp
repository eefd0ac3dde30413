// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "svsm/errors.hpp"
#include "svsm/flops/flops.hpp"
#include "svsm/harness/config.hpp"
#include "svsm/harness/metrics.hpp"
#include "svsm/harness/train.hpp"
#include "svsm/models/grad_checks.hpp"
#include "svsm/scaling/export.hpp"
#include "svsm/scenegen/scene.hpp"
#include "svsm/tensor/grad_check.hpp"
#include "svsm/util/random.hpp"

namespace py = pybind11;
using json = nlohmann::json;

namespace svsm {
namespace {

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_py(const py::handle& obj) {
  return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::int_ big(FlopCount v) { return py::int_(py::str(to_string(v))); }

ModelConfig model_from(const py::handle& obj) {
  if (py::isinstance<py::str>(obj)) return model_preset(obj.cast<std::string>());
  auto c = model_config_from_json(from_py(obj));
  c.validate();
  return c;
}

std::vector<RunLogRecord> records_from(const py::handle& obj) {
  if (py::isinstance<py::str>(obj)) return read_run_log(std::filesystem::path(obj.cast<std::string>()));
  std::vector<RunLogRecord> out;
  for (const auto& item : obj) out.push_back(run_log_record_from_json(from_py(item)));
  return out;
}

py::list records_to_py(const std::vector<RunLogRecord>& records) {
  py::list out;
  for (const auto& r : records) out.append(to_py(to_json(r)));
  return out;
}

py::dict breakdown(const FlopsBreakdown& b) {
  py::dict d;
  d["attention"] = big(b.attn);
  d["mlp_proj"] = big(b.mlp_proj);
  d["total"] = big(b.total());
  return d;
}

py::dict power_law(const PowerLawFit& f) {
  py::dict d;
  d["exponent"] = f.exponent;
  d["log_intercept"] = f.log_intercept;
  d["r2"] = f.r2;
  d["x_min"] = f.x_min;
  d["x_max"] = f.x_max;
  d["n_points"] = f.n_points;
  return d;
}

py::list frontier_to_py(const std::vector<ParetoPoint>& frontier) {
  py::list out;
  for (const auto& p : frontier) {
    py::dict d;
    d["budget"] = p.budget;
    d["loss"] = p.loss;
    d["run_id"] = p.run_id;
    d["N"] = p.N;
    d["D"] = p.D;
    d["record_flops"] = p.record_flops;
    out.append(d);
  }
  return out;
}

using Image = py::array_t<float, py::array::c_style | py::array::forcecast>;

Tensor<float> image_from(const Image& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw DimensionError("images must be [H, W, 3]");
  Tensor<float> t({std::size_t(a.shape(0)), std::size_t(a.shape(1)), 3});
  std::copy(a.data(), a.data() + a.size(), t.data().begin());
  return t;
}

template <typename T>
py::array_t<float> to_array(const std::vector<const Tensor<T>*>& images) {
  if (images.empty()) return py::array_t<float>(std::vector<py::ssize_t>{0});
  const auto& s = images.front()->shape();
  py::array_t<float> out({py::ssize_t(images.size()), py::ssize_t(s[0]), py::ssize_t(s[1]), py::ssize_t(s[2])});
  float* dst = out.mutable_data();
  for (const auto* img : images)
    for (std::size_t i = 0; i < img->size(); ++i) *dst++ = float((*img)[i]);
  return out;
}

py::array_t<float> views_to_array(const std::vector<CameraView>& views) {
  std::vector<const Tensor<float>*> ptrs;
  for (const auto& v : views) ptrs.push_back(&v.image);
  return to_array(ptrs);
}

}  // namespace
}  // namespace svsm

PYBIND11_MODULE(_core, m) {
  using namespace svsm;
  m.doc() = "Bindings for the svsmlab core library.";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  m.def("model_preset", [](const std::string& name) { return to_py(to_json(model_preset(name))); });
  m.def("model_presets", [] {
    std::vector<std::string> names;
    for (const auto& p : model_presets()) names.push_back(p.name);
    return names;
  });
  m.def("param_count", [](const py::object& model) { return param_count(model_from(model)); }, py::arg("model"),
        "Trainable parameters of a model config (dict or preset name).");

  m.def(
      "forward_flops",
      [](const py::object& model, std::uint64_t vc, std::uint64_t vt, std::uint64_t h, std::uint64_t w,
         const std::string& mode) { return breakdown(forward_flops(model_from(model), vc, vt, h, w, parse_flop_mode(mode))); },
      py::arg("model"), py::arg("context_views"), py::arg("target_views"), py::arg("height"), py::arg("width"),
      py::arg("mode") = "paper");
  m.def(
      "decode_flops",
      [](const py::object& model, std::uint64_t vc, std::uint64_t vt, std::uint64_t h, std::uint64_t w,
         const std::string& mode) { return breakdown(decode_flops(model_from(model), vc, vt, h, w, parse_flop_mode(mode))); },
      py::arg("model"), py::arg("context_views"), py::arg("target_views"), py::arg("height"), py::arg("width"),
      py::arg("mode") = "paper");
  m.def(
      "train_flops",
      [](const py::object& model, std::uint64_t vc, std::uint64_t vt, std::uint64_t batch, std::uint64_t steps,
         std::uint64_t h, std::uint64_t w, std::uint64_t backward_multiplier, const std::string& mode) {
        return big(train_flops(model_from(model), vc, vt, batch, steps, h, w, backward_multiplier, parse_flop_mode(mode)));
      },
      py::arg("model"), py::arg("context_views"), py::arg("target_views"), py::arg("batch"), py::arg("steps"),
      py::arg("height"), py::arg("width"), py::arg("backward_multiplier") = kDefaultBackwardMultiplier,
      py::arg("mode") = "paper");

  m.def("read_run_log", [](const std::string& path) { return records_to_py(read_run_log(std::filesystem::path(path))); });
  m.def("write_run_log", [](const std::string& path, const py::object& records) {
    write_run_log(std::filesystem::path(path), records_from(records));
  });
  m.def(
      "budget_grid", [](const py::object& records, std::size_t ppd) { return budget_grid(records_from(records), ppd); },
      py::arg("records"), py::arg("points_per_decade") = 8);
  m.def(
      "pareto_frontier",
      [](const py::object& records, const std::vector<double>& grid) {
        return frontier_to_py(pareto_frontier(records_from(records), grid));
      },
      py::arg("records"), py::arg("grid"));
  m.def("fit_power_law", [](const std::vector<std::pair<double, double>>& pts) { return power_law(fit_power_law(pts)); });
  m.def(
      "analyze_scaling",
      [](const py::object& records, double split, std::size_t ppd) {
        py::list out;
        for (const auto& l : analyze_scaling(records_from(records), split, ppd)) {
          py::dict d;
          d["family"] = l.family;
          d["frontier"] = frontier_to_py(l.frontier);
          d["allocation"] = py::none();
          if (l.allocation) {
            py::dict a;
            a["N_opt"] = power_law(l.allocation->a);
            a["D_opt"] = power_law(l.allocation->b);
            a["degenerate"] = l.allocation->degenerate;
            d["allocation"] = a;
          }
          d["loss"] = py::none();
          if (l.loss) {
            py::dict s;
            s["above"] = power_law(l.loss->above);
            s["below"] = power_law(l.loss->below);
            s["split"] = l.loss->split;
            s["fallback"] = l.loss->fallback;
            d["loss"] = s;
          }
          d["warnings"] = l.warnings;
          out.append(d);
        }
        return out;
      },
      py::arg("records"), py::arg("split") = kDefaultLossSplit, py::arg("points_per_decade") = 8);
  m.def(
      "effective_batch_report",
      [](const py::object& records, std::size_t window) {
        const auto runs = group_runs(records_from(records));
        const auto r = effective_batch_report(runs, window);
        py::dict d;
        py::list groups;
        for (const auto& g : r.groups) {
          py::dict gd;
          gd["b_eff"] = g.b_eff;
          gd["mean_psnr"] = g.mean_psnr;
          gd["psnr_spread"] = g.psnr_spread;
          gd["curve_max_deviation"] = g.curve_max_deviation;
          py::list rs;
          for (const auto& s : g.runs) {
            py::dict sd;
            sd["run_id"] = s.run_id;
            sd["B"] = s.shape.batch;
            sd["V_T"] = s.shape.target_views;
            sd["final_psnr"] = s.final_psnr;
            sd["final_eval_loss"] = s.final_eval_loss;
            rs.append(sd);
          }
          gd["runs"] = rs;
          groups.append(gd);
        }
        d["groups"] = groups;
        d["max_within_spread"] = r.max_within_spread;
        d["across_spread"] = r.across_spread;
        d["min_across_gap"] = r.min_across_gap;
        d["notes"] = r.notes;
        return d;
      },
      py::arg("records"), py::arg("window") = kDefaultSmoothingWindow);

  m.def("validate_experiment_config", [](const py::object& cfg) {
    auto c = experiment_config_from_json(from_py(cfg));
    c.validate();
    return to_py(to_json(c));
  }, "Parses, validates and returns the config with defaults filled in.");
  m.def(
      "train",
      [](const py::object& cfg, const std::optional<std::string>& checkpoint) {
        auto c = experiment_config_from_json(from_py(cfg));
        TrainOptions opt;
        if (checkpoint) opt.checkpoint = *checkpoint;
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train_run(c, opt);
        }
        py::dict d;
        d["records"] = records_to_py(r.records);
        d["parameters"] = r.parameters;
        py::dict e;
        e["loss"] = r.final_eval.loss;
        e["mse"] = r.final_eval.mse;
        e["psnr"] = r.final_eval.psnr;
        e["ssim"] = r.final_eval.ssim;
        d["final_eval"] = e;
        return d;
      },
      py::arg("config"), py::arg("checkpoint") = py::none(), "Trains one experiment config.");
  m.def(
      "render_checkpoint",
      [](const std::string& path, std::size_t scene, std::optional<std::size_t> vc, std::optional<std::size_t> vt) {
        const auto loaded = load_model(path);
        auto c = loaded.config;
        if (vc) c.context_views = *vc;
        if (vt) c.eval_target_views = *vt;
        c.eval_scene_count = scene + 1;
        c.validate();
        const auto episodes = evaluation_episodes(c);
        const Episode& ep = episodes.back();
        std::vector<Camera> cams;
        for (const auto& v : ep.target) cams.push_back({v.pose, v.intrinsics});
        const auto pred = loaded.model->render(ep.context, cams);
        std::vector<const Tensor<float>*> ptrs;
        for (const auto& t : pred) ptrs.push_back(&t);
        return py::make_tuple(to_array(ptrs), views_to_array(ep.target));
      },
      py::arg("checkpoint"), py::arg("scene") = 0, py::arg("context_views") = py::none(),
      py::arg("target_views") = py::none(), "Held-out (predicted, ground truth) images as [V_T, H, W, 3].");

  m.def(
      "sample_episode",
      [](std::uint64_t scene_seed, std::size_t vc, std::size_t vt, std::size_t h, std::size_t w, std::uint64_t seed,
         const std::string& trajectory) {
        Rng rng(seed);
        const auto ep = sample_episode(generate_scene(scene_seed), trajectory_preset(trajectory), vc, vt, h, w, rng);
        py::dict d;
        d["context"] = views_to_array(ep.context);
        d["target"] = views_to_array(ep.target);
        d["context_indices"] = ep.indices.context;
        d["target_indices"] = ep.indices.target;
        return d;
      },
      py::arg("scene_seed"), py::arg("context_views"), py::arg("target_views"), py::arg("height") = 32,
      py::arg("width") = 32, py::arg("seed") = 0, py::arg("trajectory") = "multiview");

  m.def("psnr_from_mse", &psnr_from_mse);
  m.def("image_mse", [](const Image& a, const Image& b) { return image_mse(image_from(a), image_from(b)); });
  m.def("ssim", [](const Image& a, const Image& b) { return ssim(image_from(a), image_from(b)); });

  m.def("registered_grad_checks", [] {
    register_model_grad_checks();
    return registered_grad_checks();
  });
  m.def(
      "grad_check",
      [](const std::string& name, std::uint64_t seed) {
        register_model_grad_checks();
        const auto r = grad_check(name, seed);
        py::dict d;
        d["max_rel_error"] = r.max_rel_error;
        d["max_abs_error"] = r.max_abs_error;
        d["checked"] = r.checked;
        return d;
      },
      py::arg("name"), py::arg("seed") = 0);
}
