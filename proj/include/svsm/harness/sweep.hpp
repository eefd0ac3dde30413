// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "svsm/harness/config.hpp"
#include "svsm/harness/train.hpp"

namespace svsm {

struct SweepOptions {
  std::filesystem::path out_dir;     // holds runs/<run_id>.jsonl and, optionally, checkpoints/
  std::filesystem::path merged_log;  // default: <out_dir>/<name>.jsonl
  bool checkpoints = false;
  std::size_t workers = 0;  // 0: the config's value
  /// Replaces train_run; used to exercise failure handling.
  std::function<TrainResult(const ExperimentConfig&, const TrainOptions&)> runner;
};

struct SweepSummary {
  std::vector<std::string> completed;  // trained in this call
  std::vector<std::string> skipped;    // already complete on disk
  std::vector<std::pair<std::string, std::string>> failed;  // run id, reason
  std::filesystem::path merged_log;
  std::size_t records = 0;
};

/// Runs every configuration of the grid not already complete. A run streams its records to
/// runs/<id>.jsonl.partial and renames it to runs/<id>.jsonl on success, so an interrupted
/// sweep resumes by id. The merged log holds every complete run sorted by (run_id, step).
SweepSummary run_sweep(const SweepConfig& sweep, const SweepOptions& options);

/// Reads every complete per-run log of a sweep directory, sorted by (run_id, step).
std::vector<RunLogRecord> merge_run_logs(const std::filesystem::path& out_dir);

}  // namespace svsm
