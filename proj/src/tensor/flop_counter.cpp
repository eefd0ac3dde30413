// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/tensor/flop_counter.hpp"

namespace svsm {
namespace {

struct CounterState {
  std::uint64_t total = 0;
  int active = 0;
  int paused = 0;
};

thread_local CounterState state;

}  // namespace

FlopCounter::FlopCounter() : start_(state.total), was_active_(state.active > 0) { ++state.active; }

FlopCounter::~FlopCounter() { --state.active; }

std::uint64_t FlopCounter::flops() const noexcept { return state.total - start_; }

FlopCountPause::FlopCountPause() { ++state.paused; }

FlopCountPause::~FlopCountPause() { --state.paused; }

namespace detail {

void count_matmul_flops(std::uint64_t m, std::uint64_t n, std::uint64_t k) {
  if (state.active > 0 && state.paused == 0) state.total += 2 * m * n * k;
}

}  // namespace detail
}  // namespace svsm
