// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "svsm/errors.hpp"
#include "svsm/tensor/flop_counter.hpp"
#include "svsm/tensor/kernels.hpp"

namespace svsm::ops {
namespace {

template <typename T>
void same_tape(Var<T> a, Var<T> b) {
  if (&a.tape() != &b.tape()) throw UsageError("operands recorded on different tapes");
}

template <typename T>
void same_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
}

template <typename T>
void accumulate(Tensor<T>& dst, const Tensor<T>& src) {
  T* d = dst.ptr();
  const T* s = src.ptr();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

template <typename T>
std::size_t last_dim(const Tensor<T>& x) {
  return x.rank() == 0 ? 1 : x.shape().back();
}

}  // namespace

template <typename T>
T gelu_value(T x) {
  constexpr T k = static_cast<T>(0.7978845608028654);  // sqrt(2/pi)
  const T u = k * (x + static_cast<T>(0.044715) * x * x * x);
  return static_cast<T>(0.5) * x * (T(1) + std::tanh(u));
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  same_tape(a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  same_shape("add", av, bv);
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape<T>& t, const Tensor<T>& g) {
    if (t.needs_grad(a)) accumulate(t.grad(a), g);
    if (t.needs_grad(b)) accumulate(t.grad(b), g);
  });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  same_tape(a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  same_shape("sub", av, bv);
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape<T>& t, const Tensor<T>& g) {
    if (t.needs_grad(a)) accumulate(t.grad(a), g);
    if (t.needs_grad(b)) {
      auto& gb = t.grad(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  same_tape(a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  same_shape("mul", av, bv);
  Tensor<T> out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape<T>& t, const Tensor<T>& g) {
    const auto& av = a.value();
    const auto& bv = b.value();
    if (t.needs_grad(a)) {
      auto& ga = t.grad(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.needs_grad(b)) {
      auto& gb = t.grad(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

template <typename T>
Var<T> scale(Var<T> x, double s) {
  const auto& xv = x.value();
  const T f = static_cast<T>(s);
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * f;
  return x.tape().record(std::move(out), {x}, [x, f](Tape<T>& t, const Tensor<T>& g) {
    auto& gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * f;
  });
}

template <typename T>
Var<T> matmul(Var<T> x, Var<T> w) {
  same_tape(x, w);
  const auto& xv = x.value();
  const auto& wv = w.value();
  if (wv.rank() != 2 || xv.rank() < 1 || last_dim(xv) != wv.dim(0)) {
    throw DimensionError("matmul: " + to_string(xv.shape()) + " x " + to_string(wv.shape()));
  }
  const std::size_t k = wv.dim(0), n = wv.dim(1), m = xv.size() / k;
  Shape shape = xv.shape();
  shape.back() = n;
  Tensor<T> out(shape);
  kernels::gemm_nn(xv.ptr(), wv.ptr(), out.ptr(), m, k, n, false);
  detail::count_matmul_flops(m, n, k);
  return x.tape().record(std::move(out), {x, w}, [x, w, m, k, n](Tape<T>& t, const Tensor<T>& g) {
    if (t.needs_grad(x)) kernels::gemm_nt(g.ptr(), w.value().ptr(), t.grad(x).ptr(), m, n, k, true);
    if (t.needs_grad(w)) kernels::gemm_tn_acc(x.value().ptr(), g.ptr(), t.grad(w).ptr(), m, k, n);
  });
}

template <typename T>
Var<T> linear(Var<T> x, Var<T> w, Var<T> b) {
  same_tape(x, w);
  same_tape(x, b);
  const auto& xv = x.value();
  const auto& wv = w.value();
  const auto& bv = b.value();
  if (wv.rank() != 2 || xv.rank() < 1 || last_dim(xv) != wv.dim(0) || bv.size() != wv.dim(1)) {
    throw DimensionError("linear: " + to_string(xv.shape()) + " x " + to_string(wv.shape()) + " + " +
                         to_string(bv.shape()));
  }
  const std::size_t k = wv.dim(0), n = wv.dim(1), m = xv.size() / k;
  Shape shape = xv.shape();
  shape.back() = n;
  Tensor<T> out(shape);
  kernels::gemm_nn(xv.ptr(), wv.ptr(), out.ptr(), m, k, n, false);
  detail::count_matmul_flops(m, n, k);
  for (std::size_t i = 0; i < m; ++i) {
    T* row = out.ptr() + i * n;
    for (std::size_t j = 0; j < n; ++j) row[j] += bv[j];
  }
  return x.tape().record(std::move(out), {x, w, b}, [x, w, b, m, k, n](Tape<T>& t, const Tensor<T>& g) {
    if (t.needs_grad(x)) kernels::gemm_nt(g.ptr(), w.value().ptr(), t.grad(x).ptr(), m, n, k, true);
    if (t.needs_grad(w)) kernels::gemm_tn_acc(x.value().ptr(), g.ptr(), t.grad(w).ptr(), m, k, n);
    if (t.needs_grad(b)) {
      auto& gb = t.grad(b);
      for (std::size_t i = 0; i < m; ++i) {
        const T* row = g.ptr() + i * n;
        for (std::size_t j = 0; j < n; ++j) gb[j] += row[j];
      }
    }
  });
}

template <typename T>
Var<T> bmm(Var<T> a, Var<T> b, bool transpose_b) {
  same_tape(a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.rank() != 3 || bv.rank() != 3 || av.dim(0) != bv.dim(0)) {
    throw DimensionError("bmm: " + to_string(av.shape()) + " x " + to_string(bv.shape()));
  }
  const std::size_t groups = av.dim(0), m = av.dim(1), k = av.dim(2);
  const std::size_t n = transpose_b ? bv.dim(1) : bv.dim(2);
  if ((transpose_b ? bv.dim(2) : bv.dim(1)) != k) {
    throw DimensionError("bmm: inner extents differ, " + to_string(av.shape()) + " x " + to_string(bv.shape()));
  }
  Tensor<T> out({groups, m, n});
  for (std::size_t gi = 0; gi < groups; ++gi) {
    const T* ap = av.ptr() + gi * m * k;
    const T* bp = bv.ptr() + gi * k * n;
    T* cp = out.ptr() + gi * m * n;
    if (transpose_b) {
      kernels::gemm_nt(ap, bp, cp, m, k, n, false);
    } else {
      kernels::gemm_nn(ap, bp, cp, m, k, n, false);
    }
  }
  detail::count_matmul_flops(groups * m, n, k);
  return a.tape().record(
      std::move(out), {a, b}, [a, b, transpose_b, groups, m, k, n](Tape<T>& t, const Tensor<T>& g) {
        const auto& av = a.value();
        const auto& bv = b.value();
        const bool ga_needed = t.needs_grad(a);
        const bool gb_needed = t.needs_grad(b);
        T* ga = ga_needed ? t.grad(a).ptr() : nullptr;
        T* gb = gb_needed ? t.grad(b).ptr() : nullptr;
        for (std::size_t gi = 0; gi < groups; ++gi) {
          const T* ap = av.ptr() + gi * m * k;
          const T* bp = bv.ptr() + gi * k * n;
          const T* gp = g.ptr() + gi * m * n;
          if (transpose_b) {
            // C = A Bᵀ: dA = G B, dB = Gᵀ A.
            if (ga_needed) kernels::gemm_nn(gp, bp, ga + gi * m * k, m, n, k, true);
            if (gb_needed) kernels::gemm_tn_acc(gp, ap, gb + gi * k * n, m, n, k);
          } else {
            // C = A B: dA = G Bᵀ, dB = Aᵀ G.
            if (ga_needed) kernels::gemm_nt(gp, bp, ga + gi * m * k, m, n, k, true);
            if (gb_needed) kernels::gemm_tn_acc(ap, gp, gb + gi * k * n, m, k, n);
          }
        }
      });
}

template <typename T>
Var<T> gelu(Var<T> x) {
  const auto& xv = x.value();
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = gelu_value(xv[i]);
  return x.tape().record(std::move(out), {x}, [x](Tape<T>& t, const Tensor<T>& g) {
    constexpr T k = static_cast<T>(0.7978845608028654);
    constexpr T c = static_cast<T>(0.044715);
    const auto& xv = x.value();
    auto& gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const T v = xv[i];
      const T th = std::tanh(k * (v + c * v * v * v));
      const T d = static_cast<T>(0.5) * (T(1) + th) +
                  static_cast<T>(0.5) * v * (T(1) - th * th) * k * (T(1) + T(3) * c * v * v);
      gx[i] += g[i] * d;
    }
  });
}

template <typename T>
Var<T> sigmoid(Var<T> x) {
  const auto& xv = x.value();
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = T(1) / (T(1) + std::exp(-xv[i]));
  return x.tape().record(std::move(out), {x}, [x](Tape<T>& t, const Tensor<T>& g) {
    const auto& xv = x.value();
    auto& gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const T s = T(1) / (T(1) + std::exp(-xv[i]));
      gx[i] += g[i] * s * (T(1) - s);
    }
  });
}

template <typename T>
Var<T> softmax(Var<T> x) {
  const auto& xv = x.value();
  const std::size_t n = last_dim(xv), rows = xv.size() / n;
  Tensor<T> out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = xv.ptr() + r * n;
    T* o = out.ptr() + r * n;
    T mx = in[0];
#pragma omp simd reduction(max : mx)
    for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, in[j]);
    for (std::size_t j = 0; j < n; ++j) o[j] = in[j] - mx;
    kernels::exp_inplace(o, n);
    T total = 0;
#pragma omp simd reduction(+ : total)
    for (std::size_t j = 0; j < n; ++j) total += o[j];
    const T inv = T(1) / total;
    for (std::size_t j = 0; j < n; ++j) o[j] *= inv;
  }
  // The backward pass needs the probabilities; skip the copy when nothing will read it.
  auto probs = x.tape().needs_grad(x) ? std::make_shared<Tensor<T>>(out) : nullptr;
  return x.tape().record(std::move(out), {x}, [x, probs, n, rows](Tape<T>& t, const Tensor<T>& g) {
    auto& gx = t.grad(x);
    for (std::size_t r = 0; r < rows; ++r) {
      const T* y = probs->ptr() + r * n;
      const T* gy = g.ptr() + r * n;
      T dot = 0;
      for (std::size_t j = 0; j < n; ++j) dot += gy[j] * y[j];
      T* gr = gx.ptr() + r * n;
      for (std::size_t j = 0; j < n; ++j) gr[j] += y[j] * (gy[j] - dot);
    }
  });
}

template <typename T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias, double eps) {
  same_tape(x, gain);
  same_tape(x, bias);
  const auto& xv = x.value();
  const std::size_t d = last_dim(xv), rows = xv.size() / d;
  if (gain.value().size() != d || bias.value().size() != d) {
    throw DimensionError("layer_norm: gain/bias must have " + std::to_string(d) + " elements");
  }
  const auto& gv = gain.value();
  const auto& bv = bias.value();
  Tensor<T> out(xv.shape());
  auto normalized = std::make_shared<std::vector<T>>(xv.size());
  auto inv_std = std::make_shared<std::vector<T>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = xv.ptr() + r * d;
    T mu = 0;
    for (std::size_t j = 0; j < d; ++j) mu += in[j];
    mu /= static_cast<T>(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (in[j] - mu) * (in[j] - mu);
    var /= static_cast<T>(d);
    const T is = T(1) / std::sqrt(var + static_cast<T>(eps));
    (*inv_std)[r] = is;
    T* xh = normalized->data() + r * d;
    T* o = out.ptr() + r * d;
    for (std::size_t j = 0; j < d; ++j) {
      xh[j] = (in[j] - mu) * is;
      o[j] = xh[j] * gv[j] + bv[j];
    }
  }
  return x.tape().record(
      std::move(out), {x, gain, bias}, [x, gain, bias, normalized, inv_std, d, rows](Tape<T>& t, const Tensor<T>& g) {
        const auto& gv = gain.value();
        if (t.needs_grad(gain) || t.needs_grad(bias)) {
          T* gg = t.needs_grad(gain) ? t.grad(gain).ptr() : nullptr;
          T* gb = t.needs_grad(bias) ? t.grad(bias).ptr() : nullptr;
          for (std::size_t r = 0; r < rows; ++r) {
            const T* gy = g.ptr() + r * d;
            const T* xh = normalized->data() + r * d;
            for (std::size_t j = 0; j < d; ++j) {
              if (gg) gg[j] += gy[j] * xh[j];
              if (gb) gb[j] += gy[j];
            }
          }
        }
        if (!t.needs_grad(x)) return;
        auto& gx = t.grad(x);
        std::vector<T> dxh(d);
        for (std::size_t r = 0; r < rows; ++r) {
          const T* gy = g.ptr() + r * d;
          const T* xh = normalized->data() + r * d;
          T mean_d = 0, mean_dx = 0;
          for (std::size_t j = 0; j < d; ++j) {
            dxh[j] = gy[j] * gv[j];
            mean_d += dxh[j];
            mean_dx += dxh[j] * xh[j];
          }
          mean_d /= static_cast<T>(d);
          mean_dx /= static_cast<T>(d);
          T* gr = gx.ptr() + r * d;
          const T is = (*inv_std)[r];
          for (std::size_t j = 0; j < d; ++j) gr[j] += is * (dxh[j] - mean_d - xh[j] * mean_dx);
        }
      });
}

template <typename T>
Var<T> residual_add(Var<T> x, Var<T> f_x, std::size_t depth) {
  if (depth == 0) throw ConfigError("residual_add: depth must be >= 1");
  same_tape(x, f_x);
  const auto& xv = x.value();
  const auto& fv = f_x.value();
  same_shape("residual_add", xv, fv);
  const T s = depth == 1 ? T(1) : static_cast<T>(1.0 / std::sqrt(static_cast<double>(depth)));
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] + fv[i] * s;
  return x.tape().record(std::move(out), {x, f_x}, [x, f_x, s](Tape<T>& t, const Tensor<T>& g) {
    if (t.needs_grad(x)) accumulate(t.grad(x), g);
    if (t.needs_grad(f_x)) {
      auto& gf = t.grad(f_x);
      for (std::size_t i = 0; i < g.size(); ++i) gf[i] += g[i] * s;
    }
  });
}

template <typename T>
Var<T> reshape(Var<T> x, Shape shape) {
  Tensor<T> out = x.value().reshaped(std::move(shape));
  return x.tape().record(std::move(out), {x}, [x](Tape<T>& t, const Tensor<T>& g) {
    auto& gx = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

template <typename T>
Var<T> split_heads(Var<T> x, std::size_t heads) {
  const auto& xv = x.value();
  if (xv.rank() != 3 || heads == 0 || xv.dim(2) % heads != 0) {
    throw DimensionError("split_heads: shape " + to_string(xv.shape()) + " with " + std::to_string(heads) +
                         " heads");
  }
  const std::size_t batch = xv.dim(0), n = xv.dim(1), d = xv.dim(2), e = d / heads;
  Tensor<T> out({batch * heads, n, e});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t h = 0; h < heads; ++h) {
        const T* src = xv.ptr() + (b * n + i) * d + h * e;
        std::copy(src, src + e, out.ptr() + ((b * heads + h) * n + i) * e);
      }
  return x.tape().record(std::move(out), {x}, [x, batch, n, d, e, heads](Tape<T>& t, const Tensor<T>& g) {
    auto& gx = t.grad(x);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t h = 0; h < heads; ++h) {
          const T* src = g.ptr() + ((b * heads + h) * n + i) * e;
          T* dst = gx.ptr() + (b * n + i) * d + h * e;
          for (std::size_t c = 0; c < e; ++c) dst[c] += src[c];
        }
  });
}

template <typename T>
Var<T> merge_heads(Var<T> x, std::size_t heads) {
  const auto& xv = x.value();
  if (xv.rank() != 3 || heads == 0 || xv.dim(0) % heads != 0) {
    throw DimensionError("merge_heads: shape " + to_string(xv.shape()) + " with " + std::to_string(heads) +
                         " heads");
  }
  const std::size_t batch = xv.dim(0) / heads, n = xv.dim(1), e = xv.dim(2), d = e * heads;
  Tensor<T> out({batch, n, d});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t h = 0; h < heads; ++h)
      for (std::size_t i = 0; i < n; ++i) {
        const T* src = xv.ptr() + ((b * heads + h) * n + i) * e;
        std::copy(src, src + e, out.ptr() + (b * n + i) * d + h * e);
      }
  return x.tape().record(std::move(out), {x}, [x, batch, n, d, e, heads](Tape<T>& t, const Tensor<T>& g) {
    auto& gx = t.grad(x);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t h = 0; h < heads; ++h)
        for (std::size_t i = 0; i < n; ++i) {
          const T* src = g.ptr() + (b * n + i) * d + h * e;
          T* dst = gx.ptr() + ((b * heads + h) * n + i) * e;
          for (std::size_t c = 0; c < e; ++c) dst[c] += src[c];
        }
  });
}

template <typename T>
Var<T> concat_tokens(std::span<const Var<T>> parts) {
  if (parts.empty()) throw DimensionError("concat_tokens: no inputs");
  const auto& first = parts[0].value();
  if (first.rank() != 3) throw DimensionError("concat_tokens: inputs must be rank 3");
  const std::size_t batch = first.dim(0), d = first.dim(2);
  std::vector<std::size_t> counts;
  std::size_t total = 0;
  for (const auto& p : parts) {
    same_tape(parts[0], p);
    const auto& v = p.value();
    if (v.rank() != 3 || v.dim(0) != batch || v.dim(2) != d) {
      throw DimensionError("concat_tokens: " + to_string(v.shape()) + " vs " + to_string(first.shape()));
    }
    counts.push_back(v.dim(1));
    total += v.dim(1);
  }
  Tensor<T> out({batch, total, d});
  std::size_t offset = 0;
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const auto& v = parts[pi].value();
    for (std::size_t b = 0; b < batch; ++b) {
      std::copy(v.ptr() + b * counts[pi] * d, v.ptr() + (b + 1) * counts[pi] * d,
                out.ptr() + (b * total + offset) * d);
    }
    offset += counts[pi];
  }
  std::vector<Var<T>> inputs(parts.begin(), parts.end());
  return parts[0].tape().record(
      std::move(out), std::span<const Var<T>>(inputs),
      [inputs, counts, batch, total, d](Tape<T>& t, const Tensor<T>& g) {
        std::size_t offset = 0;
        for (std::size_t pi = 0; pi < inputs.size(); ++pi) {
          if (t.needs_grad(inputs[pi])) {
            auto& gp = t.grad(inputs[pi]);
            for (std::size_t b = 0; b < batch; ++b) {
              const T* src = g.ptr() + (b * total + offset) * d;
              T* dst = gp.ptr() + b * counts[pi] * d;
              for (std::size_t i = 0; i < counts[pi] * d; ++i) dst[i] += src[i];
            }
          }
          offset += counts[pi];
        }
      });
}

template <typename T>
Var<T> slice_tokens(Var<T> x, std::size_t start, std::size_t count) {
  const auto& xv = x.value();
  if (xv.rank() != 3 || count == 0 || start + count > xv.dim(1)) {
    throw DimensionError("slice_tokens: [" + std::to_string(start) + ", " + std::to_string(start + count) +
                         ") out of " + to_string(xv.shape()));
  }
  const std::size_t batch = xv.dim(0), n = xv.dim(1), d = xv.dim(2);
  Tensor<T> out({batch, count, d});
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy(xv.ptr() + (b * n + start) * d, xv.ptr() + (b * n + start + count) * d, out.ptr() + b * count * d);
  }
  return x.tape().record(std::move(out), {x}, [x, batch, n, d, start, count](Tape<T>& t, const Tensor<T>& g) {
    auto& gx = t.grad(x);
    for (std::size_t b = 0; b < batch; ++b) {
      const T* src = g.ptr() + b * count * d;
      T* dst = gx.ptr() + (b * n + start) * d;
      for (std::size_t i = 0; i < count * d; ++i) dst[i] += src[i];
    }
  });
}

template <typename T>
Var<T> repeat_batch(Var<T> x, std::size_t batch) {
  const auto& xv = x.value();
  if (xv.rank() != 2 || batch == 0) throw DimensionError("repeat_batch: expects a rank-2 tensor");
  const std::size_t n = xv.dim(0), d = xv.dim(1);
  Tensor<T> out({batch, n, d});
  for (std::size_t b = 0; b < batch; ++b) std::copy(xv.ptr(), xv.ptr() + n * d, out.ptr() + b * n * d);
  return x.tape().record(std::move(out), {x}, [x, batch, n, d](Tape<T>& t, const Tensor<T>& g) {
    auto& gx = t.grad(x);
    for (std::size_t b = 0; b < batch; ++b) {
      const T* src = g.ptr() + b * n * d;
      for (std::size_t i = 0; i < n * d; ++i) gx[i] += src[i];
    }
  });
}

template <typename T>
Var<T> repeat_each(Var<T> x, std::size_t copies) {
  const auto& xv = x.value();
  if (xv.rank() != 3 || copies == 0) throw DimensionError("repeat_each: expects a rank-3 tensor and copies >= 1");
  const std::size_t batch = xv.dim(0), block = xv.dim(1) * xv.dim(2);
  Tensor<T> out({batch * copies, xv.dim(1), xv.dim(2)});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < copies; ++c)
      std::copy(xv.ptr() + b * block, xv.ptr() + (b + 1) * block, out.ptr() + (b * copies + c) * block);
  return x.tape().record(std::move(out), {x}, [x, batch, copies, block](Tape<T>& t, const Tensor<T>& g) {
    auto& gx = t.grad(x);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t c = 0; c < copies; ++c) {
        const T* src = g.ptr() + (b * copies + c) * block;
        T* dst = gx.ptr() + b * block;
        for (std::size_t i = 0; i < block; ++i) dst[i] += src[i];
      }
  });
}

template <typename T>
Var<T> block4_transform(Var<T> x, std::shared_ptr<const std::vector<Block4<T>>> mats) {
  const auto& xv = x.value();
  const std::size_t d = last_dim(xv);
  if (d % 4 != 0) throw ConfigError("block4_transform: channel count " + std::to_string(d) + " not divisible by 4");
  const std::size_t tokens = xv.size() / d;
  if (!mats || mats->size() != tokens) {
    throw DimensionError("block4_transform: " + std::to_string(tokens) + " tokens but " +
                         std::to_string(mats ? mats->size() : 0) + " matrices");
  }
  Tensor<T> out(xv.shape());
  for (std::size_t tk = 0; tk < tokens; ++tk) {
    const auto& m = (*mats)[tk];
    for (std::size_t gi = 0; gi < d; gi += 4) {
      const T* in = xv.ptr() + tk * d + gi;
      T* o = out.ptr() + tk * d + gi;
      for (std::size_t r = 0; r < 4; ++r) {
        o[r] = m[r * 4 + 0] * in[0] + m[r * 4 + 1] * in[1] + m[r * 4 + 2] * in[2] + m[r * 4 + 3] * in[3];
      }
    }
  }
  return x.tape().record(std::move(out), {x}, [x, mats, d, tokens](Tape<T>& t, const Tensor<T>& g) {
    auto& gx = t.grad(x);
    for (std::size_t tk = 0; tk < tokens; ++tk) {
      const auto& m = (*mats)[tk];
      for (std::size_t gi = 0; gi < d; gi += 4) {
        const T* gy = g.ptr() + tk * d + gi;
        T* o = gx.ptr() + tk * d + gi;
        for (std::size_t c = 0; c < 4; ++c) {
          o[c] += m[0 * 4 + c] * gy[0] + m[1 * 4 + c] * gy[1] + m[2 * 4 + c] * gy[2] + m[3 * 4 + c] * gy[3];
        }
      }
    }
  });
}

template <typename T>
Var<T> unpatchify(Var<T> x, std::size_t height, std::size_t width, std::size_t patch, std::size_t channels) {
  const auto& xv = x.value();
  if (patch == 0 || height % patch != 0 || width % patch != 0) {
    throw ConfigError("unpatchify: patch size must divide the image extent");
  }
  const std::size_t gy = height / patch, gx = width / patch;
  if (xv.rank() != 3 || xv.dim(1) != gy * gx || xv.dim(2) != patch * patch * channels) {
    throw DimensionError("unpatchify: shape " + to_string(xv.shape()) + " does not tile " + std::to_string(height) +
                         "x" + std::to_string(width));
  }
  const std::size_t count = xv.dim(0);
  const std::size_t row = patch * channels;
  Tensor<T> out({count, height, width, channels});
  for (std::size_t n = 0; n < count; ++n)
    for (std::size_t ty = 0; ty < gy; ++ty)
      for (std::size_t tx = 0; tx < gx; ++tx) {
        const T* src = xv.ptr() + ((n * gy + ty) * gx + tx) * patch * row;
        for (std::size_t iy = 0; iy < patch; ++iy) {
          T* dst = out.ptr() + ((n * height + ty * patch + iy) * width + tx * patch) * channels;
          std::copy(src + iy * row, src + (iy + 1) * row, dst);
        }
      }
  return x.tape().record(
      std::move(out), {x}, [x, count, gy, gx, patch, row, height, width, channels](Tape<T>& t, const Tensor<T>& g) {
        auto& gxv = t.grad(x);
        for (std::size_t n = 0; n < count; ++n)
          for (std::size_t ty = 0; ty < gy; ++ty)
            for (std::size_t tx = 0; tx < gx; ++tx) {
              T* dst = gxv.ptr() + ((n * gy + ty) * gx + tx) * patch * row;
              for (std::size_t iy = 0; iy < patch; ++iy) {
                const T* src = g.ptr() + ((n * height + ty * patch + iy) * width + tx * patch) * channels;
                for (std::size_t c = 0; c < row; ++c) dst[iy * row + c] += src[c];
              }
            }
      });
}

template <typename T>
Var<T> conv2d(Var<T> x, Var<T> w, Var<T> b, std::size_t stride, std::size_t pad) {
  same_tape(x, w);
  same_tape(x, b);
  const auto& xv = x.value();
  const auto& wv = w.value();
  if (xv.rank() != 4 || wv.rank() != 4 || wv.dim(0) != wv.dim(1) || wv.dim(2) != xv.dim(3) ||
      b.value().size() != wv.dim(3) || stride == 0) {
    throw DimensionError("conv2d: input " + to_string(xv.shape()) + ", weight " + to_string(wv.shape()));
  }
  const std::size_t n_img = xv.dim(0), h = xv.dim(1), wd = xv.dim(2), ci = xv.dim(3);
  const std::size_t k = wv.dim(0), co = wv.dim(3);
  if (h + 2 * pad < k || wd + 2 * pad < k) throw DimensionError("conv2d: kernel larger than padded input");
  const std::size_t ho = (h + 2 * pad - k) / stride + 1, wo = (wd + 2 * pad - k) / stride + 1;
  Tensor<T> out({n_img, ho, wo, co});
  const auto& bv = b.value();
  for (std::size_t n = 0; n < n_img; ++n)
    for (std::size_t oy = 0; oy < ho; ++oy)
      for (std::size_t ox = 0; ox < wo; ++ox) {
        T* o = out.ptr() + ((n * ho + oy) * wo + ox) * co;
        for (std::size_t c = 0; c < co; ++c) o[c] = bv[c];
        for (std::size_t ky = 0; ky < k; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) - static_cast<std::ptrdiff_t>(pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t kx = 0; kx < k; ++kx) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox * stride + kx) - static_cast<std::ptrdiff_t>(pad);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(wd)) continue;
            const T* in = xv.ptr() + ((n * h + static_cast<std::size_t>(iy)) * wd + static_cast<std::size_t>(ix)) * ci;
            const T* wk = wv.ptr() + (ky * k + kx) * ci * co;
            for (std::size_t c = 0; c < ci; ++c) {
              const T xval = in[c];
              const T* __restrict wr = wk + c * co;
              for (std::size_t j = 0; j < co; ++j) o[j] += xval * wr[j];
            }
          }
        }
      }
  return x.tape().record(
      std::move(out), {x, w, b},
      [x, w, b, n_img, h, wd, ci, k, co, ho, wo, stride, pad](Tape<T>& t, const Tensor<T>& g) {
        const auto& xv = x.value();
        const auto& wv = w.value();
        T* gx = t.needs_grad(x) ? t.grad(x).ptr() : nullptr;
        T* gw = t.needs_grad(w) ? t.grad(w).ptr() : nullptr;
        T* gb = t.needs_grad(b) ? t.grad(b).ptr() : nullptr;
        for (std::size_t n = 0; n < n_img; ++n)
          for (std::size_t oy = 0; oy < ho; ++oy)
            for (std::size_t ox = 0; ox < wo; ++ox) {
              const T* go = g.ptr() + ((n * ho + oy) * wo + ox) * co;
              if (gb)
                for (std::size_t c = 0; c < co; ++c) gb[c] += go[c];
              for (std::size_t ky = 0; ky < k; ++ky) {
                const std::ptrdiff_t iy =
                    static_cast<std::ptrdiff_t>(oy * stride + ky) - static_cast<std::ptrdiff_t>(pad);
                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                for (std::size_t kx = 0; kx < k; ++kx) {
                  const std::ptrdiff_t ix =
                      static_cast<std::ptrdiff_t>(ox * stride + kx) - static_cast<std::ptrdiff_t>(pad);
                  if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(wd)) continue;
                  const std::size_t in_off =
                      ((n * h + static_cast<std::size_t>(iy)) * wd + static_cast<std::size_t>(ix)) * ci;
                  const std::size_t w_off = (ky * k + kx) * ci * co;
                  for (std::size_t c = 0; c < ci; ++c) {
                    const T* wr = wv.ptr() + w_off + c * co;
                    if (gx) {
                      T acc = 0;
                      for (std::size_t j = 0; j < co; ++j) acc += wr[j] * go[j];
                      gx[in_off + c] += acc;
                    }
                    if (gw) {
                      const T xval = xv[in_off + c];
                      T* gwr = gw + w_off + c * co;
                      for (std::size_t j = 0; j < co; ++j) gwr[j] += xval * go[j];
                    }
                  }
                }
              }
            }
      });
}

template <typename T>
Var<T> sum(Var<T> x) {
  const auto& xv = x.value();
  T total = 0;
  for (std::size_t i = 0; i < xv.size(); ++i) total += xv[i];
  return x.tape().record(Tensor<T>::scalar(total), {x}, [x](Tape<T>& t, const Tensor<T>& g) {
    auto& gx = t.grad(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[0];
  });
}

template <typename T>
Var<T> mean(Var<T> x) {
  return scale(sum(x), 1.0 / static_cast<double>(x.value().size()));
}

template <typename T>
Var<T> mse(Var<T> a, Var<T> b) {
  same_tape(a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  same_shape("mse", av, bv);
  const std::size_t count = av.size();
  T total = 0;
  for (std::size_t i = 0; i < count; ++i) total += (av[i] - bv[i]) * (av[i] - bv[i]);
  return a.tape().record(
      Tensor<T>::scalar(total / static_cast<T>(count)), {a, b}, [a, b, count](Tape<T>& t, const Tensor<T>& g) {
        const auto& av = a.value();
        const auto& bv = b.value();
        const T f = T(2) * g[0] / static_cast<T>(count);
        if (t.needs_grad(a)) {
          auto& ga = t.grad(a);
          for (std::size_t i = 0; i < count; ++i) ga[i] += f * (av[i] - bv[i]);
        }
        if (t.needs_grad(b)) {
          auto& gb = t.grad(b);
          for (std::size_t i = 0; i < count; ++i) gb[i] -= f * (av[i] - bv[i]);
        }
      });
}

#define SVSM_INSTANTIATE_OPS(T)                                                                  \
  template T gelu_value(T);                                                                      \
  template Var<T> add(Var<T>, Var<T>);                                                           \
  template Var<T> sub(Var<T>, Var<T>);                                                           \
  template Var<T> mul(Var<T>, Var<T>);                                                           \
  template Var<T> scale(Var<T>, double);                                                         \
  template Var<T> matmul(Var<T>, Var<T>);                                                        \
  template Var<T> linear(Var<T>, Var<T>, Var<T>);                                                \
  template Var<T> bmm(Var<T>, Var<T>, bool);                                                     \
  template Var<T> gelu(Var<T>);                                                                  \
  template Var<T> sigmoid(Var<T>);                                                               \
  template Var<T> softmax(Var<T>);                                                               \
  template Var<T> layer_norm(Var<T>, Var<T>, Var<T>, double);                                    \
  template Var<T> residual_add(Var<T>, Var<T>, std::size_t);                                     \
  template Var<T> reshape(Var<T>, Shape);                                                        \
  template Var<T> split_heads(Var<T>, std::size_t);                                              \
  template Var<T> merge_heads(Var<T>, std::size_t);                                              \
  template Var<T> concat_tokens(std::span<const Var<T>>);                                        \
  template Var<T> slice_tokens(Var<T>, std::size_t, std::size_t);                                \
  template Var<T> repeat_batch(Var<T>, std::size_t);                                             \
  template Var<T> repeat_each(Var<T>, std::size_t);                                              \
  template Var<T> block4_transform(Var<T>, std::shared_ptr<const std::vector<Block4<T>>>);       \
  template Var<T> unpatchify(Var<T>, std::size_t, std::size_t, std::size_t, std::size_t);        \
  template Var<T> conv2d(Var<T>, Var<T>, Var<T>, std::size_t, std::size_t);                      \
  template Var<T> sum(Var<T>);                                                                   \
  template Var<T> mean(Var<T>);                                                                  \
  template Var<T> mse(Var<T>, Var<T>);

SVSM_INSTANTIATE_OPS(float)
SVSM_INSTANTIATE_OPS(double)

#undef SVSM_INSTANTIATE_OPS

}  // namespace svsm::ops
