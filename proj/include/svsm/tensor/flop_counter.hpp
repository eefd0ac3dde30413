// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace svsm {

/// Counts forward matrix-product FLOPs (2·m·n·k per product) on the current
/// thread while alive. Only matmul/linear/bmm forwards are counted; element-wise
/// ops, norms and backward products are not.
class FlopCounter {
 public:
  FlopCounter();
  ~FlopCounter();
  FlopCounter(const FlopCounter&) = delete;
  FlopCounter& operator=(const FlopCounter&) = delete;

  std::uint64_t flops() const noexcept;

 private:
  std::uint64_t start_;
  bool was_active_;
};

/// Suspends FLOP counting in its scope (tokenizer and output-head projections).
class FlopCountPause {
 public:
  FlopCountPause();
  ~FlopCountPause();
  FlopCountPause(const FlopCountPause&) = delete;
  FlopCountPause& operator=(const FlopCountPause&) = delete;
};

namespace detail {
void count_matmul_flops(std::uint64_t m, std::uint64_t n, std::uint64_t k);
}

}  // namespace svsm
