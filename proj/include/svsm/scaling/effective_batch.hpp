// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svsm/scaling/run_log.hpp"

namespace svsm {

inline constexpr std::size_t kDefaultSmoothingWindow = 50;

/// A run's batch shape, read from its id ("...-b16-vt2...") when the log carries no other source.
struct BatchShape {
  std::uint64_t batch = 0;
  std::uint64_t target_views = 0;
  std::uint64_t effective() const { return batch * target_views; }
};
std::optional<BatchShape> parse_batch_shape(const std::string& run_id);

struct EffectiveBatchRun {
  std::string run_id;
  BatchShape shape;
  std::vector<RunLogRecord> records;  // ascending step
};

struct RunSummary {
  std::string run_id;
  BatchShape shape;
  double final_psnr = 0.0;
  double final_eval_loss = 0.0;
};

struct EffectiveBatchGroup {
  std::uint64_t b_eff = 0;
  std::vector<RunSummary> runs;
  double mean_psnr = 0.0;
  double psnr_spread = 0.0;          // max − min final PSNR
  double curve_max_deviation = 0.0;  // max over shared steps of the smoothed train-loss range
};

struct EffectiveBatchReport {
  std::vector<EffectiveBatchGroup> groups;  // ascending b_eff
  double max_within_spread = 0.0;
  double across_spread = 0.0;   // max − min of group means
  double min_across_gap = 0.0;  // smallest gap between neighbouring group means
  std::vector<std::string> notes;
};

/// Groups runs by B·V_T. Groups with a single run are excluded with a note.
EffectiveBatchReport effective_batch_report(std::span<const EffectiveBatchRun> runs,
                                            std::size_t smoothing_window = kDefaultSmoothingWindow);
/// Splits a merged log by run id; UsageError when a run's shape cannot be parsed.
std::vector<EffectiveBatchRun> group_runs(std::span<const RunLogRecord> records);

}  // namespace svsm
