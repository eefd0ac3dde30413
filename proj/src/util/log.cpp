// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/util/log.hpp"

#include <cstdlib>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace svsm {

bool parse_log_level(const std::string& name, spdlog::level::level_enum& out) {
  if (name == "error") out = spdlog::level::err;
  else if (name == "warn") out = spdlog::level::warn;
  else if (name == "info") out = spdlog::level::info;
  else if (name == "debug") out = spdlog::level::debug;
  else return false;
  return true;
}

std::shared_ptr<spdlog::logger> logger() {
  static const std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_mt("svsm");
    l->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
    auto level = spdlog::level::info;
    if (const char* env = std::getenv("SVSM_LOG_LEVEL")) {
      if (!parse_log_level(env, level)) {
        level = spdlog::level::info;
        l->warn("ignoring SVSM_LOG_LEVEL='{}' (expected error, warn, info or debug)", env);
      }
    }
    l->set_level(level);
    return l;
  }();
  return instance;
}

void set_log_level(spdlog::level::level_enum level) { logger()->set_level(level); }

}  // namespace svsm
