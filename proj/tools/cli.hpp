// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace svsm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUser = 1;
inline constexpr int kExitInternal = 2;

/// The full command tree with every subcommand and flag registered. Callbacks write
/// to `out`; diagnostics go to `err`.
std::unique_ptr<CLI::App> make_app(std::ostream& out, std::ostream& err);

/// Parses and runs one invocation. Returns the process exit code.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace svsm::cli
