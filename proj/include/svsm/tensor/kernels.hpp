// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

// Dense product kernels. The summation order of an output element depends only on
// the operand shapes' inner and column extents, never on the row count, so a row of
// the result depends only on the matching row of the left operand: batching more
// rows never changes existing rows.
namespace svsm::kernels {

/// C[m,n] = A[m,k]·B[k,n], or C += A·B when `accumulate`.
template <typename T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n, bool accumulate);

/// C[m,n] = A[m,k]·B[n,k]ᵀ, or C += A·Bᵀ when `accumulate`.
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n, bool accumulate);

/// C[k,n] += A[m,k]ᵀ·B[m,n].
template <typename T>
void gemm_tn_acc(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n);

/// x ← exp(x) in place. The float version is a branch-free polynomial within a few ulp
/// of std::exp that the compiler can vectorise; results below 2⁻¹²⁶ flush to that bound.
/// The double version calls std::exp.
void exp_inplace(float* x, std::size_t n);
void exp_inplace(double* x, std::size_t n);

}  // namespace svsm::kernels
