// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/tensor/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

namespace svsm::kernels {

namespace {

// Narrow outputs (attention values, head width 8) leave the row-update loop too short to
// vectorise; transposing B turns each output into a contiguous dot product over k instead.
constexpr std::size_t kNarrow = 16;

template <typename T>
void gemm_narrow(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  thread_local std::vector<T> bt;
  bt.resize(k * n);
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = b[p * n + j];
  for (std::size_t i = 0; i < m; ++i) {
    const T* __restrict arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const T* __restrict brow = bt.data() + j * k;
      T s = 0;
#pragma omp simd reduction(+ : s)
      for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      c[i * n + j] = accumulate ? c[i * n + j] + s : s;
    }
  }
}

}  // namespace

template <typename T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  if (n < kNarrow && k >= 2 * kNarrow) return gemm_narrow(a, b, c, m, k, n, accumulate);
  for (std::size_t i = 0; i < m; ++i) {
    T* __restrict crow = c + i * n;
    if (!accumulate) std::fill(crow, crow + n, T(0));
    const T* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = arow[p];
      const T* __restrict brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

template <typename T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  thread_local std::vector<T> bt;
  bt.resize(k * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
  }
  gemm_nn(a, bt.data(), c, m, k, n, accumulate);
}

template <typename T>
void gemm_tn_acc(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    const T* __restrict brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = arow[p];
      T* __restrict crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

void exp_inplace(float* x, std::size_t n) {
  // exp(x) = 2^k · exp(r), r = x − k·ln2 ∈ [−ln2/2, ln2/2], with a degree-6 Taylor series for exp(r).
  constexpr float log2e = 1.44269504088896341f;
  constexpr float ln2_hi = 0.693359375f, ln2_lo = -2.12194440e-4f;
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) {
    const float v = std::clamp(x[i], -87.3f, 88.7f);
    const float k = std::nearbyint(v * log2e);
    const float r = (v - k * ln2_hi) - k * ln2_lo;
    float p = 1.0f / 720.0f;
    p = p * r + 1.0f / 120.0f;
    p = p * r + 1.0f / 24.0f;
    p = p * r + 1.0f / 6.0f;
    p = p * r + 0.5f;
    p = p * r + 1.0f;
    p = p * r + 1.0f;
    const auto bits = static_cast<std::uint32_t>(static_cast<std::int32_t>(k) + 127) << 23;
    x[i] = p * std::bit_cast<float>(bits);
  }
}

void exp_inplace(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(x[i]);
}

template void gemm_nn(const float*, const float*, float*, std::size_t, std::size_t, std::size_t, bool);
template void gemm_nn(const double*, const double*, double*, std::size_t, std::size_t, std::size_t, bool);
template void gemm_nt(const float*, const float*, float*, std::size_t, std::size_t, std::size_t, bool);
template void gemm_nt(const double*, const double*, double*, std::size_t, std::size_t, std::size_t, bool);
template void gemm_tn_acc(const float*, const float*, float*, std::size_t, std::size_t, std::size_t);
template void gemm_tn_acc(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);

}  // namespace svsm::kernels
