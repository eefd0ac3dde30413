// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/harness/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include "svsm/errors.hpp"
#include "svsm/util/log.hpp"

namespace svsm {

std::vector<RunLogRecord> merge_run_logs(const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> files;
  const auto runs = out_dir / "runs";
  if (std::filesystem::exists(runs))
    for (const auto& e : std::filesystem::directory_iterator(runs))
      if (e.path().extension() == ".jsonl") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<RunLogRecord> all;
  for (const auto& f : files) {
    auto recs = read_run_log(f);
    all.insert(all.end(), recs.begin(), recs.end());
  }
  sort_run_log(all);
  return all;
}

SweepSummary run_sweep(const SweepConfig& sweep, const SweepOptions& options) {
  if (options.out_dir.empty()) throw UsageError("sweep needs an output directory");
  const auto configs = sweep.expand();
  if (configs.empty()) throw ConfigError("sweep grid is empty");
  const auto runs_dir = options.out_dir / "runs";
  std::filesystem::create_directories(runs_dir);
  if (options.checkpoints) std::filesystem::create_directories(options.out_dir / "checkpoints");

  SweepSummary summary;
  summary.merged_log = options.merged_log.empty() ? options.out_dir / (sweep.name + ".jsonl") : options.merged_log;
  std::vector<const ExperimentConfig*> pending;
  for (const auto& c : configs) {
    if (std::filesystem::exists(runs_dir / (c.run_id + ".jsonl")))
      summary.skipped.push_back(c.run_id);
    else
      pending.push_back(&c);
  }

  auto log = logger();
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < pending.size(); i = next++) {
      const ExperimentConfig& c = *pending[i];
      const auto final_path = runs_dir / (c.run_id + ".jsonl");
      const auto partial = runs_dir / (c.run_id + ".jsonl.partial");
      try {
        std::ofstream os(partial, std::ios::trunc);
        if (!os) throw Error("cannot open " + partial.string());
        TrainOptions topt;
        topt.on_record = [&](const RunLogRecord& r) {
          os << to_jsonl_line(r) << '\n';
          os.flush();
        };
        if (options.checkpoints) topt.checkpoint = options.out_dir / "checkpoints" / (c.run_id + ".ckpt");
        options.runner ? options.runner(c, topt) : train_run(c, topt);
        os.close();
        std::filesystem::rename(partial, final_path);
        std::lock_guard lock(mu);
        summary.completed.push_back(c.run_id);
        log->info("sweep {}: finished {}", sweep.name, c.run_id);
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        summary.failed.emplace_back(c.run_id, e.what());
        log->error("sweep {}: {} failed: {}", sweep.name, c.run_id, e.what());
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, options.workers ? options.workers : sweep.workers);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(workers, pending.size()); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::sort(summary.completed.begin(), summary.completed.end());
  std::sort(summary.failed.begin(), summary.failed.end());

  // Only runs of this grid go into its merged log.
  std::vector<RunLogRecord> merged;
  for (const auto& r : merge_run_logs(options.out_dir))
    if (std::any_of(configs.begin(), configs.end(), [&](const ExperimentConfig& c) { return c.run_id == r.run_id; }))
      merged.push_back(r);
  write_run_log(summary.merged_log, merged);
  summary.records = merged.size();
  return summary;
}

}  // namespace svsm
