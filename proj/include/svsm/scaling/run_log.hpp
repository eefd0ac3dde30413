// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace svsm {

/// One evaluation point of a training run. `D` counts rendered target views (B·V_T per
/// step) and `flops` is cumulative training compute in paper-constant accounting.
struct RunLogRecord {
  std::string run_id;
  std::string family;
  std::uint64_t N = 0;
  std::uint64_t step = 0;
  std::uint64_t D = 0;
  double flops = 0.0;
  double train_loss = 0.0;
  double eval_loss = 0.0;
  double eval_psnr = 0.0;
  double eval_ssim = 0.0;
  double wall_seconds = 0.0;

  bool operator==(const RunLogRecord&) const = default;
};

nlohmann::json to_json(const RunLogRecord& r);
/// Exactly the eleven run-log fields; missing, extra or mistyped fields raise FormatError.
RunLogRecord run_log_record_from_json(const nlohmann::json& j);

/// One JSON object per line, no trailing whitespace.
std::string to_jsonl_line(const RunLogRecord& r);
void write_run_log(std::ostream& out, const std::vector<RunLogRecord>& records);
/// Writes to a temporary sibling and renames it into place.
void write_run_log(const std::filesystem::path& path, const std::vector<RunLogRecord>& records);

/// Blank lines are skipped. FormatError carries the 1-based line number as offset.
std::vector<RunLogRecord> read_run_log(std::istream& in);
std::vector<RunLogRecord> read_run_log(const std::filesystem::path& path);

/// Stable sort by (run_id, step).
void sort_run_log(std::vector<RunLogRecord>& records);

/// Checks the per-run invariants: step, D and flops non-decreasing and N constant.
/// Throws FormatError naming the run on violation.
void validate_run_log(const std::vector<RunLogRecord>& records);

}  // namespace svsm
