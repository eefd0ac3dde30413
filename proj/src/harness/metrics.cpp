// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "svsm/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "svsm/errors.hpp"

namespace svsm {
namespace {

template <typename T>
void check_pair(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) throw DimensionError("metric inputs differ in shape");
  if (a.rank() != 3 || a.dim(2) != 3) throw DimensionError("metric inputs must be [H, W, 3]");
}

template <typename T>
std::vector<double> luminance(const Tensor<T>& img) {
  const std::size_t n = img.dim(0) * img.dim(1);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = 0.299 * double(img[3 * i]) + 0.587 * double(img[3 * i + 1]) + 0.114 * double(img[3 * i + 2]);
  return y;
}

}  // namespace

template <typename T>
double image_mse(const Tensor<T>& a, const Tensor<T>& b) {
  check_pair(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = double(a[i]) - double(b[i]);
    s += d * d;
  }
  return s / double(a.size());
}

double psnr_from_mse(double mse) {
  if (std::isnan(mse)) return mse;
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

template <typename T>
double ssim(const Tensor<T>& a, const Tensor<T>& b) {
  check_pair(a, b);
  const std::size_t h = a.dim(0), w = a.dim(1);
  std::size_t side = std::min<std::size_t>({11, h, w});
  if (side % 2 == 0) --side;
  std::vector<double> g(side);
  const double c = double(side / 2);
  double total = 0.0;
  for (std::size_t i = 0; i < side; ++i) {
    g[i] = std::exp(-(double(i) - c) * (double(i) - c) / (2.0 * 1.5 * 1.5));
    total += g[i];
  }
  for (auto& v : g) v /= total;

  const auto x = luminance(a), y = luminance(b);
  constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r + side <= h; ++r) {
    for (std::size_t q = 0; q + side <= w; ++q) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (std::size_t u = 0; u < side; ++u) {
        for (std::size_t v = 0; v < side; ++v) {
          const double wt = g[u] * g[v];
          const double xv = x[(r + u) * w + q + v], yv = y[(r + u) * w + q + v];
          mx += wt * xv;
          my += wt * yv;
          sxx += wt * xv * xv;
          syy += wt * yv * yv;
          sxy += wt * xv * yv;
        }
      }
      const double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
      sum += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return sum / double(count);
}

template double image_mse(const Tensor<float>&, const Tensor<float>&);
template double image_mse(const Tensor<double>&, const Tensor<double>&);
template double ssim(const Tensor<float>&, const Tensor<float>&);
template double ssim(const Tensor<double>&, const Tensor<double>&);

}  // namespace svsm
