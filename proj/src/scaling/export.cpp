// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/scaling/export.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "svsm/errors.hpp"

namespace svsm {
namespace {

// Shortest representation that round-trips.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void fit_row(std::ostream& out, const std::string& family, const char* target, const PowerLawFit& f) {
  out << field(family) << ',' << target << ',' << num(f.exponent) << ',' << num(f.log_intercept) << ','
      << num(f.r2) << ',' << num(f.x_min) << ',' << num(f.x_max) << ',' << f.n_points << '\n';
}

}  // namespace

std::vector<FamilyLaws> analyze_scaling(const std::vector<RunLogRecord>& records, double split,
                                        std::size_t points_per_decade) {
  std::map<std::string, std::vector<RunLogRecord>> by_family;
  for (const auto& r : records) by_family[r.family].push_back(r);
  std::vector<FamilyLaws> out;
  for (auto& [family, recs] : by_family) {
    FamilyLaws laws;
    laws.family = family;
    const auto grid = budget_grid(recs, points_per_decade);
    laws.frontier = pareto_frontier(recs, grid);
    if (laws.frontier.empty()) laws.warnings.push_back("empty frontier");
    try {
      laws.allocation = chinchilla_fit(laws.frontier);
      for (const auto& w : laws.allocation->warnings) laws.warnings.push_back(w);
    } catch (const DomainError& e) {
      laws.warnings.push_back(std::string("no allocation fit: ") + e.what());
    }
    try {
      laws.loss = piecewise_loss_fit(laws.frontier, split);
      if (laws.loss->fallback) laws.warnings.push_back("loss split outside the frontier range; single-segment fit");
    } catch (const DomainError& e) {
      laws.warnings.push_back(std::string("no loss fit: ") + e.what());
    }
    out.push_back(std::move(laws));
  }
  return out;
}

void write_frontier_csv(std::ostream& out, const std::vector<FamilyLaws>& laws) {
  out << "family,budget,loss,run_id,N,D\n";
  for (const auto& l : laws)
    for (const auto& p : l.frontier)
      out << field(l.family) << ',' << num(p.budget) << ',' << num(p.loss) << ',' << field(p.run_id) << ',' << p.N
          << ',' << p.D << '\n';
}

void write_fits_csv(std::ostream& out, const std::vector<FamilyLaws>& laws) {
  out << "family,target,exponent,log_intercept,r2,x_min,x_max,n_points\n";
  for (const auto& l : laws) {
    if (l.allocation) {
      fit_row(out, l.family, "N_opt", l.allocation->a);
      fit_row(out, l.family, "D_opt", l.allocation->b);
    }
    if (l.loss) {
      fit_row(out, l.family, "loss_above", l.loss->above);
      fit_row(out, l.family, "loss_below", l.loss->below);
    }
  }
}

void write_curves_csv(std::ostream& out, const std::vector<EffectiveBatchRun>& runs, std::size_t window) {
  out << "# smoothing_window=" << window << '\n';
  out << "run_id,b_eff,B,V_T,step,train_loss,smoothed_loss\n";
  for (const auto& run : runs) {
    std::vector<double> losses;
    for (const auto& r : run.records) losses.push_back(r.train_loss);
    const auto smooth = rolling_mean(losses, window);
    for (std::size_t i = 0; i < run.records.size(); ++i)
      out << field(run.run_id) << ',' << run.shape.effective() << ',' << run.shape.batch << ','
          << run.shape.target_views << ',' << run.records[i].step << ',' << num(losses[i]) << ',' << num(smooth[i])
          << '\n';
  }
}

void write_effective_batch_csv(std::ostream& out, const EffectiveBatchReport& report) {
  out << "b_eff,run_id,B,V_T,final_psnr,final_eval_loss\n";
  for (const auto& g : report.groups)
    for (const auto& r : g.runs)
      out << g.b_eff << ',' << field(r.run_id) << ',' << r.shape.batch << ',' << r.shape.target_views << ','
          << num(r.final_psnr) << ',' << num(r.final_eval_loss) << '\n';
}

std::string format_laws_summary(const std::vector<FamilyLaws>& laws) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  for (const auto& l : laws) {
    os << l.family << ": " << l.frontier.size() << " frontier points\n";
    if (l.allocation) {
      os.precision(4);
      os << "  N_opt exponent a = " << l.allocation->a.exponent << " (r2 " << l.allocation->a.r2 << ")\n";
      os << "  D_opt exponent b = " << l.allocation->b.exponent << " (r2 " << l.allocation->b.r2 << ")\n";
    }
    if (l.loss) {
      os.precision(4);
      os << "  loss exponent above " << l.loss->split << ": " << l.loss->above.exponent << ", below: "
         << l.loss->below.exponent << (l.loss->fallback ? " (single segment)" : "") << '\n';
    }
    for (const auto& w : l.warnings) os << "  warning: " << w << '\n';
  }
  return os.str();
}

std::string format_effective_batch_summary(const EffectiveBatchReport& report) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  for (const auto& g : report.groups) {
    os << "B_eff=" << g.b_eff << ": mean PSNR " << g.mean_psnr << " dB, spread " << g.psnr_spread
       << " dB, smoothed-loss deviation " << g.curve_max_deviation << '\n';
    for (const auto& r : g.runs)
      os << "  " << r.run_id << " (B=" << r.shape.batch << ", V_T=" << r.shape.target_views << "): " << r.final_psnr
         << " dB\n";
  }
  os << "max within-group spread " << report.max_within_spread << " dB, across-group spread "
     << report.across_spread << " dB\n";
  for (const auto& n : report.notes) os << "note: " << n << '\n';
  return os.str();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& body) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::trunc | std::ios::binary);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    os << body;
    os.flush();
    if (!os) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace svsm
