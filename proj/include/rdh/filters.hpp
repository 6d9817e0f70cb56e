#pragma once

// Separable spatial filters shared by the Retinex, dehazing and metric code.
// All filters are templated on the scalar type and operate on row-major
// Eigen arrays (rows = image height).

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rdh/parallel.hpp"

namespace rdh {

using Eigen::Index;

template <typename Scalar>
using PlaneOf = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using KernelOf = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Symmetric (half-sample) reflection: ... c b a | a b c ... | c b a ...
/// Valid for any offset, including kernels wider than the signal.
inline Index reflect_index(Index i, Index n) {
  const Index period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

/// Normalized Gaussian taps on [-ceil(3 sigma), ceil(3 sigma)].
template <typename Scalar = double>
KernelOf<Scalar> gaussian_kernel(double sigma) {
  if (!(sigma > 0)) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
  const Index radius = static_cast<Index>(std::ceil(3.0 * sigma));
  Eigen::ArrayXd k(2 * radius + 1);
  for (Index i = -radius; i <= radius; ++i)
    k(i + radius) = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
  k /= k.sum();
  return k.cast<Scalar>();
}

/// Convolves rows with `kx` then columns with `ky`; both kernels have odd
/// length and are centered. Borders use symmetric reflection.
template <typename Scalar>
PlaneOf<Scalar> convolve_separable(const PlaneOf<Scalar>& src, const KernelOf<Scalar>& kx,
                                   const KernelOf<Scalar>& ky) {
  if (kx.size() % 2 == 0 || ky.size() % 2 == 0)
    throw std::invalid_argument("convolve_separable: kernels must have odd length");
  const Index h = src.rows(), w = src.cols();
  const Index rx = kx.size() / 2, ry = ky.size() / 2;
  using Row = Eigen::Array<Scalar, 1, Eigen::Dynamic>;

  PlaneOf<Scalar> tmp(h, w);
  parallel_for(h, [&](Index y0, Index y1) {
    Row padded(w + 2 * rx);
    for (Index y = y0; y < y1; ++y) {
      for (Index i = 0; i < padded.size(); ++i) padded(i) = src(y, reflect_index(i - rx, w));
      auto out = tmp.row(y);
      out.setZero();
      for (Index j = 0; j < kx.size(); ++j) out += kx(j) * padded.segment(j, w);
    }
  });

  PlaneOf<Scalar> dst(h, w);
  parallel_for(h, [&](Index y0, Index y1) {
    for (Index y = y0; y < y1; ++y) {
      auto out = dst.row(y);
      out.setZero();
      for (Index j = 0; j < ky.size(); ++j) out += ky(j) * tmp.row(reflect_index(y - ry + j, h));
    }
  });
  return dst;
}

template <typename Scalar>
PlaneOf<Scalar> gaussian_blur(const PlaneOf<Scalar>& src, double sigma) {
  const KernelOf<Scalar> k = gaussian_kernel<Scalar>(sigma);
  return convolve_separable<Scalar>(src, k, k);
}

/// Mean over the (2rx+1)x(2ry+1) window clipped to the image, i.e. each
/// output is normalized by the number of in-bounds pixels.
template <typename Scalar>
PlaneOf<Scalar> box_mean(const PlaneOf<Scalar>& src, Index rx, Index ry) {
  if (rx < 0 || ry < 0) throw std::invalid_argument("box_mean: negative radius");
  if (rx == 0 && ry == 0) return src;
  const Index h = src.rows(), w = src.cols();
  Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> sat =
      Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(h + 1, w + 1);
  for (Index y = 0; y < h; ++y) {
    double run = 0;
    for (Index x = 0; x < w; ++x) {
      run += static_cast<double>(src(y, x));
      sat(y + 1, x + 1) = sat(y, x + 1) + run;
    }
  }
  PlaneOf<Scalar> dst(h, w);
  parallel_for(h, [&](Index y0, Index y1) {
    for (Index y = y0; y < y1; ++y) {
      const Index top = std::max<Index>(0, y - ry), bottom = std::min(h, y + ry + 1);
      for (Index x = 0; x < w; ++x) {
        const Index left = std::max<Index>(0, x - rx), right = std::min(w, x + rx + 1);
        const double sum = sat(bottom, right) - sat(top, right) - sat(bottom, left) + sat(top, left);
        dst(y, x) = static_cast<Scalar>(sum / static_cast<double>((bottom - top) * (right - left)));
      }
    }
  });
  return dst;
}

template <typename Scalar>
PlaneOf<Scalar> box_mean(const PlaneOf<Scalar>& src, Index radius) {
  return box_mean<Scalar>(src, radius, radius);
}

namespace detail {

// van Herk / Gil-Werman running extremum over a clipped window of radius r:
// three comparisons per sample independent of r. Out-of-range samples are
// padded with the identity element so the window behaves as if clipped.
template <typename Scalar, typename Pick>
void running_extremum(const Scalar* in, Index n, Index stride, Index r, Scalar identity, Pick pick,
                      Scalar* out, Index out_stride, std::vector<Scalar>& g, std::vector<Scalar>& hbuf) {
  const Index k = 2 * r + 1;
  const Index padded = n + 2 * r;
  const Index blocks = (padded + k - 1) / k;
  const Index len = blocks * k;
  g.assign(static_cast<std::size_t>(len), identity);
  hbuf.assign(static_cast<std::size_t>(len), identity);
  auto value = [&](Index i) { return (i >= r && i < r + n) ? in[(i - r) * stride] : identity; };
  for (Index b = 0; b < blocks; ++b) {
    const Index s = b * k;
    g[s] = value(s);
    for (Index i = s + 1; i < s + k; ++i) g[i] = pick(g[i - 1], value(i));
    hbuf[s + k - 1] = value(s + k - 1);
    for (Index i = s + k - 2; i >= s; --i) hbuf[i] = pick(hbuf[i + 1], value(i));
  }
  // Output i covers padded positions [i, i + 2r].
  for (Index i = 0; i < n; ++i) out[i * out_stride] = pick(hbuf[i], g[i + 2 * r]);
}

template <typename Scalar, typename Pick>
PlaneOf<Scalar> separable_extremum(const PlaneOf<Scalar>& src, Index radius, Scalar identity, Pick pick) {
  if (radius < 0) throw std::invalid_argument("extremum filter: negative radius");
  if (radius == 0) return src;
  const Index h = src.rows(), w = src.cols();
  PlaneOf<Scalar> tmp(h, w), dst(h, w);
  parallel_for(h, [&](Index y0, Index y1) {
    std::vector<Scalar> g, hb;
    for (Index y = y0; y < y1; ++y)
      running_extremum(&src(y, 0), w, 1, radius, identity, pick, &tmp(y, 0), 1, g, hb);
  });
  parallel_for(w, [&](Index x0, Index x1) {
    std::vector<Scalar> g, hb;
    for (Index x = x0; x < x1; ++x)
      running_extremum(&tmp(0, x), h, w, radius, identity, pick, &dst(0, x), w, g, hb);
  });
  return dst;
}

}  // namespace detail

/// Minimum over the square window of side 2r+1 clipped to the image.
template <typename Scalar>
PlaneOf<Scalar> min_filter(const PlaneOf<Scalar>& src, Index radius) {
  return detail::separable_extremum<Scalar>(src, radius, std::numeric_limits<Scalar>::infinity(),
                                            [](Scalar a, Scalar b) { return a < b ? a : b; });
}

/// Maximum over the square window of side 2r+1 clipped to the image.
template <typename Scalar>
PlaneOf<Scalar> max_filter(const PlaneOf<Scalar>& src, Index radius) {
  return detail::separable_extremum<Scalar>(src, radius, -std::numeric_limits<Scalar>::infinity(),
                                            [](Scalar a, Scalar b) { return a > b ? a : b; });
}

}  // namespace rdh
