// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

#include <spdlog/spdlog.h>

namespace svsm {

/// Library-wide logger writing to stderr. Its level comes from SVSM_LOG_LEVEL
/// (error, warn, info, debug; default info).
std::shared_ptr<spdlog::logger> logger();

/// Parses a level name; returns false for anything outside the four accepted names.
bool parse_log_level(const std::string& name, spdlog::level::level_enum& out);
void set_log_level(spdlog::level::level_enum level);

}  // namespace svsm
