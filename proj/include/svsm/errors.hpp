// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace svsm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad hyper-parameters, indivisible shapes, unknown keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Tensor extents that do not agree with an operation's contract.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. a second backward pass over a consumed tape.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, singular or ill-conditioned matrices.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Arguments outside a function's mathematical domain (log of a non-positive value, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed binary or text file. Carries the byte offset where parsing stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace svsm
