// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/scaling/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "svsm/errors.hpp"

namespace svsm {
namespace {

ParetoPoint point_from(double budget, const RunLogRecord& r) {
  return {budget, r.eval_loss, r.run_id, r.N, r.D, r.flops};
}

void check_grid(std::span<const double> grid) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("budget grid must be ascending");
}

}  // namespace

std::vector<ParetoPoint> pareto_frontier_reference(std::span<const RunLogRecord> records,
                                                   std::span<const double> grid) {
  check_grid(grid);
  std::vector<ParetoPoint> out;
  for (double budget : grid) {
    const RunLogRecord* best = nullptr;
    for (const auto& r : records) {
      if (!std::isfinite(r.eval_loss) || !(r.flops <= budget)) continue;
      if (!best || r.eval_loss < best->eval_loss) best = &r;
    }
    if (best) out.push_back(point_from(budget, *best));
  }
  return out;
}

std::vector<ParetoPoint> pareto_frontier(std::span<const RunLogRecord> records, std::span<const double> grid) {
  check_grid(grid);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (std::isfinite(records[i].eval_loss) && !std::isnan(records[i].flops)) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(records[a].flops, a) < std::tie(records[b].flops, b);
  });

  std::vector<ParetoPoint> out;
  std::size_t next = 0;
  std::ptrdiff_t best = -1;
  for (double budget : grid) {
    for (; next < order.size() && records[order[next]].flops <= budget; ++next) {
      const std::size_t i = order[next];
      if (best < 0) {
        best = std::ptrdiff_t(i);
        continue;
      }
      const double cur = records[std::size_t(best)].eval_loss;
      if (records[i].eval_loss < cur || (records[i].eval_loss == cur && std::ptrdiff_t(i) < best))
        best = std::ptrdiff_t(i);
    }
    if (best >= 0) out.push_back(point_from(budget, records[std::size_t(best)]));
  }
  return out;
}

std::vector<double> budget_grid(std::span<const RunLogRecord> records, std::size_t points_per_decade) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : records) {
    if (!(r.flops > 0.0) || !std::isfinite(r.flops)) continue;
    lo = std::min(lo, r.flops);
    hi = std::max(hi, r.flops);
  }
  if (!(hi > 0.0)) return {};
  if (lo == hi) return {lo};
  const double l0 = std::log10(lo), l1 = std::log10(hi);
  const auto steps = std::max<std::size_t>(1, std::size_t(std::ceil((l1 - l0) * double(points_per_decade))));
  std::vector<double> grid;
  for (std::size_t i = 0; i <= steps; ++i) grid.push_back(std::pow(10.0, l0 + (l1 - l0) * double(i) / double(steps)));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

double PowerLawFit::operator()(double x) const { return std::exp(log_intercept + exponent * std::log(x)); }

PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw DomainError("power-law fit needs at least two points");
  std::vector<double> lx, ly;
  PowerLawFit fit;
  fit.x_min = std::numeric_limits<double>::infinity();
  fit.x_max = 0.0;
  for (auto [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
      throw DomainError("power-law fit needs positive finite coordinates");
    lx.push_back(std::log(x));
    ly.push_back(std::log(y));
    fit.x_min = std::min(fit.x_min, x);
    fit.x_max = std::max(fit.x_max, x);
  }
  const double n = double(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw DomainError("power-law fit needs at least two distinct x values");
  fit.exponent = sxy / sxx;
  fit.log_intercept = my - fit.exponent * mx;
  fit.n_points = lx.size();
  if (syy == 0.0) {
    fit.r2 = 1.0;
  } else {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double e = ly[i] - (fit.log_intercept + fit.exponent * lx[i]);
      ss_res += e * e;
    }
    fit.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return fit;
}

namespace {

// Distinct achieving records on a frontier, in order of first appearance.
std::vector<const ParetoPoint*> unique_records(std::span<const ParetoPoint> frontier) {
  std::set<std::tuple<std::string, std::uint64_t, std::uint64_t, double>> seen;
  std::vector<const ParetoPoint*> out;
  for (const auto& p : frontier)
    if (seen.emplace(p.run_id, p.N, p.D, p.record_flops).second) out.push_back(&p);
  return out;
}

}  // namespace

ChinchillaFit chinchilla_fit(std::span<const ParetoPoint> frontier) {
  const auto points = unique_records(frontier);
  std::set<double> budgets;
  for (const auto* p : points) budgets.insert(p->record_flops);
  if (budgets.size() < 3) throw DomainError("allocation fit needs at least three distinct frontier budgets");
  std::vector<std::pair<double, double>> n_pts, d_pts;
  std::set<std::uint64_t> sizes;
  for (const auto* p : points) {
    n_pts.emplace_back(p->record_flops, double(p->N));
    d_pts.emplace_back(p->record_flops, double(p->D));
    sizes.insert(p->N);
  }
  ChinchillaFit fit;
  fit.a = fit_power_law(n_pts);
  fit.b = fit_power_law(d_pts);
  if (sizes.size() == 1) {
    fit.degenerate = true;
    fit.warnings.push_back("frontier is realized by a single model size; the N_opt exponent is not informative");
  }
  return fit;
}

PiecewiseFit piecewise_loss_fit(std::span<const ParetoPoint> frontier, double split) {
  std::vector<std::pair<double, double>> all, above, below;
  for (const auto* p : unique_records(frontier)) {
    all.emplace_back(p->record_flops, p->loss);
    (p->loss > split ? above : below).emplace_back(p->record_flops, p->loss);
  }
  PiecewiseFit out;
  out.split = split;
  auto distinct_x = [](const std::vector<std::pair<double, double>>& v) {
    std::set<double> xs;
    for (const auto& pt : v) xs.insert(pt.first);
    return xs.size();
  };
  if (distinct_x(above) < 2 || distinct_x(below) < 2) {
    out.fallback = true;
    out.above = out.below = fit_power_law(all);
    return out;
  }
  out.above = fit_power_law(above);
  out.below = fit_power_law(below);
  return out;
}

Allocation recommend_allocation(double budget, const ChinchillaFit& fits) {
  if (!(budget > 0.0) || !std::isfinite(budget)) throw DomainError("compute budget must be positive");
  Allocation a;
  a.budget = budget;
  a.N_opt = fits.a(budget);
  a.D_opt = fits.b(budget);
  const double lo = std::min(fits.a.x_min, fits.b.x_min), hi = std::max(fits.a.x_max, fits.b.x_max);
  a.extrapolated = budget > 10.0 * hi || budget < lo / 10.0;
  return a;
}

std::vector<double> rolling_mean(std::span<const double> values, std::size_t window) {
  if (window == 0) throw DomainError("smoothing window must be positive");
  const std::size_t n = values.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= window / 2 ? i - window / 2 : 0;
    const std::size_t hi = std::min(n - 1, i + (window - 1) / 2);
    double s = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) s += values[j];
    out[i] = s / double(hi - lo + 1);
  }
  return out;
}

}  // namespace svsm
