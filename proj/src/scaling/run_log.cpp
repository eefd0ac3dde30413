// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/scaling/run_log.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "svsm/errors.hpp"

namespace svsm {
namespace {

constexpr const char* kFields[] = {"run_id", "family", "N", "step", "D", "flops", "train_loss",
                                   "eval_loss", "eval_psnr", "eval_ssim", "wall_seconds"};

std::uint64_t get_count(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw Error(std::string("field '") + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

// NaN and infinities are written as null so each line stays valid JSON.
double get_real(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) throw Error(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::string get_text(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw Error(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

nlohmann::json to_json(const RunLogRecord& r) {
  nlohmann::json j = nlohmann::json::object();
  j["run_id"] = r.run_id;
  j["family"] = r.family;
  j["N"] = r.N;
  j["step"] = r.step;
  j["D"] = r.D;
  j["flops"] = r.flops;
  j["train_loss"] = r.train_loss;
  j["eval_loss"] = r.eval_loss;
  j["eval_psnr"] = r.eval_psnr;
  j["eval_ssim"] = r.eval_ssim;
  j["wall_seconds"] = r.wall_seconds;
  return j;
}

RunLogRecord run_log_record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("run-log record is not a JSON object", 0);
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (std::find_if(std::begin(kFields), std::end(kFields), [&](const char* f) { return it.key() == f; }) ==
          std::end(kFields))
        throw Error("unknown field '" + it.key() + "'");
    }
    for (const char* f : kFields)
      if (!j.contains(f)) throw Error(std::string("missing field '") + f + "'");
    RunLogRecord r;
    r.run_id = get_text(j, "run_id");
    r.family = get_text(j, "family");
    r.N = get_count(j, "N");
    r.step = get_count(j, "step");
    r.D = get_count(j, "D");
    r.flops = get_real(j, "flops");
    r.train_loss = get_real(j, "train_loss");
    r.eval_loss = get_real(j, "eval_loss");
    r.eval_psnr = get_real(j, "eval_psnr");
    r.eval_ssim = get_real(j, "eval_ssim");
    r.wall_seconds = get_real(j, "wall_seconds");
    return r;
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(std::string("bad run-log record: ") + e.what(), 0);
  }
}

std::string to_jsonl_line(const RunLogRecord& r) { return to_json(r).dump(); }

void write_run_log(std::ostream& out, const std::vector<RunLogRecord>& records) {
  for (const auto& r : records) out << to_jsonl_line(r) << '\n';
}

void write_run_log(const std::filesystem::path& path, const std::vector<RunLogRecord>& records) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    write_run_log(os, records);
    os.flush();
    if (!os) throw Error("failed writing run log " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<RunLogRecord> read_run_log(std::istream& in) {
  std::vector<RunLogRecord> out;
  std::string line;
  std::uint64_t offset = 0;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::uint64_t start = offset;
    offset += line.size() + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError("run log line " + std::to_string(lineno) + ": " + e.what(), start);
    }
    try {
      out.push_back(run_log_record_from_json(j));
    } catch (const FormatError& e) {
      throw FormatError("run log line " + std::to_string(lineno) + ": " + e.what(), start);
    }
  }
  return out;
}

std::vector<RunLogRecord> read_run_log(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open run log " + path.string());
  return read_run_log(is);
}

void sort_run_log(std::vector<RunLogRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const RunLogRecord& a, const RunLogRecord& b) {
    return a.run_id != b.run_id ? a.run_id < b.run_id : a.step < b.step;
  });
}

void validate_run_log(const std::vector<RunLogRecord>& records) {
  std::map<std::string, const RunLogRecord*> last;
  for (const auto& r : records) {
    auto [it, fresh] = last.try_emplace(r.run_id, &r);
    if (fresh) continue;
    const RunLogRecord& p = *it->second;
    if (r.N != p.N) throw FormatError("run " + r.run_id + ": parameter count changes", 0);
    if (r.step < p.step || r.D < p.D || r.flops < p.flops)
      throw FormatError("run " + r.run_id + ": step, D or flops decreases at step " + std::to_string(r.step), 0);
    it->second = &r;
  }
}

}  // namespace svsm
