// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "svsm/scaling/effective_batch.hpp"
#include "svsm/scaling/scaling.hpp"

namespace svsm {

/// Per-family analysis of a run log.
struct FamilyLaws {
  std::string family;
  std::vector<ParetoPoint> frontier;
  std::optional<ChinchillaFit> allocation;  // absent below three distinct frontier records
  std::optional<PiecewiseFit> loss;
  std::vector<std::string> warnings;
};

std::vector<FamilyLaws> analyze_scaling(const std::vector<RunLogRecord>& records, double split = kDefaultLossSplit,
                                        std::size_t points_per_decade = 8);

/// family,budget,loss,run_id,N,D
void write_frontier_csv(std::ostream& out, const std::vector<FamilyLaws>& laws);
/// family,target,exponent,log_intercept,r2,x_min,x_max,n_points with targets N_opt, D_opt,
/// loss_above and loss_below.
void write_fits_csv(std::ostream& out, const std::vector<FamilyLaws>& laws);
/// A "# smoothing_window=W" line, then run_id,b_eff,B,V_T,step,train_loss,smoothed_loss.
void write_curves_csv(std::ostream& out, const std::vector<EffectiveBatchRun>& runs, std::size_t window);
/// b_eff,run_id,B,V_T,final_psnr,final_eval_loss
void write_effective_batch_csv(std::ostream& out, const EffectiveBatchReport& report);

std::string format_laws_summary(const std::vector<FamilyLaws>& laws);
std::string format_effective_batch_summary(const EffectiveBatchReport& report);

/// Writes `body` through a temporary sibling file.
void write_text_atomic(const std::filesystem::path& path, const std::string& body);

}  // namespace svsm
