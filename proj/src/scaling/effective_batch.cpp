// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/scaling/effective_batch.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>

#include "svsm/errors.hpp"
#include "svsm/scaling/scaling.hpp"

namespace svsm {

std::optional<BatchShape> parse_batch_shape(const std::string& run_id) {
  static const std::regex batch(R"((?:^|[-_])b(\d+)(?=[-_]|$))");
  static const std::regex views(R"((?:^|[-_])vt(\d+)(?=[-_]|$))");
  std::smatch mb, mv;
  if (!std::regex_search(run_id, mb, batch) || !std::regex_search(run_id, mv, views)) return std::nullopt;
  BatchShape s{std::stoull(mb[1].str()), std::stoull(mv[1].str())};
  if (s.batch == 0 || s.target_views == 0) return std::nullopt;
  return s;
}

std::vector<EffectiveBatchRun> group_runs(std::span<const RunLogRecord> records) {
  std::map<std::string, EffectiveBatchRun> by_id;
  for (const auto& r : records) {
    auto [it, fresh] = by_id.try_emplace(r.run_id);
    if (fresh) {
      auto shape = parse_batch_shape(r.run_id);
      if (!shape) throw UsageError("cannot read batch size and target views from run id '" + r.run_id + "'");
      it->second.run_id = r.run_id;
      it->second.shape = *shape;
    }
    it->second.records.push_back(r);
  }
  std::vector<EffectiveBatchRun> out;
  for (auto& [id, run] : by_id) {
    std::stable_sort(run.records.begin(), run.records.end(),
                     [](const RunLogRecord& a, const RunLogRecord& b) { return a.step < b.step; });
    out.push_back(std::move(run));
  }
  return out;
}

namespace {

double curve_deviation(const std::vector<const EffectiveBatchRun*>& runs, std::size_t window) {
  std::map<std::uint64_t, std::vector<double>> by_step;
  for (const auto* run : runs) {
    std::vector<double> losses;
    for (const auto& r : run->records) losses.push_back(r.train_loss);
    const auto smooth = rolling_mean(losses, window);
    for (std::size_t i = 0; i < smooth.size(); ++i) by_step[run->records[i].step].push_back(smooth[i]);
  }
  double dev = 0.0;
  for (const auto& [step, vals] : by_step) {
    if (vals.size() != runs.size()) continue;
    auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    dev = std::max(dev, *hi - *lo);
  }
  return dev;
}

}  // namespace

EffectiveBatchReport effective_batch_report(std::span<const EffectiveBatchRun> runs, std::size_t smoothing_window) {
  std::map<std::uint64_t, std::vector<const EffectiveBatchRun*>> groups;
  for (const auto& run : runs) {
    if (run.records.empty()) continue;
    groups[run.shape.effective()].push_back(&run);
  }
  EffectiveBatchReport rep;
  for (const auto& [b_eff, members] : groups) {
    if (members.size() < 2) {
      rep.notes.push_back("B_eff=" + std::to_string(b_eff) + " has a single run (" + members.front()->run_id +
                          ") and is excluded");
      continue;
    }
    EffectiveBatchGroup g;
    g.b_eff = b_eff;
    double lo = INFINITY, hi = -INFINITY, sum = 0.0;
    for (const auto* run : members) {
      const auto& last = run->records.back();
      g.runs.push_back({run->run_id, run->shape, last.eval_psnr, last.eval_loss});
      lo = std::min(lo, last.eval_psnr);
      hi = std::max(hi, last.eval_psnr);
      sum += last.eval_psnr;
    }
    g.mean_psnr = sum / double(members.size());
    g.psnr_spread = hi - lo;
    g.curve_max_deviation = curve_deviation(members, smoothing_window);
    rep.max_within_spread = std::max(rep.max_within_spread, g.psnr_spread);
    rep.groups.push_back(std::move(g));
  }
  if (rep.groups.size() >= 2) {
    std::vector<double> means;
    for (const auto& g : rep.groups) means.push_back(g.mean_psnr);
    auto [lo, hi] = std::minmax_element(means.begin(), means.end());
    rep.across_spread = *hi - *lo;
    std::sort(means.begin(), means.end());
    rep.min_across_gap = INFINITY;
    for (std::size_t i = 1; i < means.size(); ++i) rep.min_across_gap = std::min(rep.min_across_gap, means[i] - means[i - 1]);
  } else {
    rep.notes.push_back("fewer than two B_eff groups; no across-group comparison");
  }
  return rep;
}

}  // namespace svsm
