// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "svsm/scaling/run_log.hpp"

namespace svsm {

/// Best evaluation loss reachable within a compute budget.
struct ParetoPoint {
  double budget = 0.0;        // grid value χ
  double loss = 0.0;          // min eval_loss over records with flops ≤ budget
  std::string run_id;         // run achieving it
  std::uint64_t N = 0;
  std::uint64_t D = 0;
  double record_flops = 0.0;  // compute actually spent by the achieving record

  bool operator==(const ParetoPoint&) const = default;
};

/// Lower envelope over `grid` (ascending). Budgets below every record are omitted, so an
/// empty result means no record fits the grid. Records with non-finite eval_loss are ignored.
/// Ties go to the earliest record in input order.
std::vector<ParetoPoint> pareto_frontier(std::span<const RunLogRecord> records, std::span<const double> grid);
/// O(records × grid) reference scan with the same contract.
std::vector<ParetoPoint> pareto_frontier_reference(std::span<const RunLogRecord> records,
                                                   std::span<const double> grid);
/// Log-spaced budgets spanning the logged compute range.
std::vector<double> budget_grid(std::span<const RunLogRecord> records, std::size_t points_per_decade = 8);

/// y = exp(log_intercept) · x^exponent, fitted by least squares in log-log space.
struct PowerLawFit {
  double exponent = 0.0;
  double log_intercept = 0.0;  // natural log
  double r2 = 1.0;
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t n_points = 0;

  double operator()(double x) const;
};

/// DomainError for fewer than two points, a non-positive coordinate, or a single distinct x.
/// A constant y gives exponent 0 and r² = 1.
PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points);

struct ChinchillaFit {
  PowerLawFit a;  // N_opt ∝ χ^a
  PowerLawFit b;  // D_opt ∝ χ^b
  bool degenerate = false;  // frontier reached through a single model size
  std::vector<std::string> warnings;
};

/// Fits N and D against spent compute over the distinct records on the frontier (a record
/// repeated across several grid budgets counts once). DomainError below three distinct budgets.
ChinchillaFit chinchilla_fit(std::span<const ParetoPoint> frontier);

struct PiecewiseFit {
  PowerLawFit above;  // loss > split
  PowerLawFit below;  // loss ≤ split
  double split = 0.14;
  bool fallback = false;  // a segment had under two points; both fields hold the single fit
};

inline constexpr double kDefaultLossSplit = 0.14;

PiecewiseFit piecewise_loss_fit(std::span<const ParetoPoint> frontier, double split = kDefaultLossSplit);

struct Allocation {
  double budget = 0.0;
  double N_opt = 0.0;
  double D_opt = 0.0;
  bool extrapolated = false;  // budget beyond 10× the fitted range on either side
};

/// DomainError for a non-positive budget.
Allocation recommend_allocation(double budget, const ChinchillaFit& fits);

/// Centered rolling mean over offsets [-window/2, (window-1)/2], truncated at the ends.
std::vector<double> rolling_mean(std::span<const double> values, std::size_t window);

}  // namespace svsm
