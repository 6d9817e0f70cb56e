#pragma once

// Fixtures and brute-force references shared by the unit tests and the
// acceptance runner. References favour obviousness over speed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rdh/rdh.hpp"

namespace rdh::test {

inline ImageF random_image(Index w, Index h, Index channels, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  ImageF img(w, h, channels);
  for (Index c = 0; c < channels; ++c)
    for (Index i = 0; i < img.pixels(); ++i) img.plane(c).data()[i] = dist(gen);
  return img;
}

/// Fresh scratch directory under the system temp dir, removed on scope exit.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("rdh_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline double max_abs_diff(const Plane& a, const Plane& b) { return (a - b).abs().maxCoeff(); }

inline double max_abs_diff(const ImageF& a, const ImageF& b) {
  double m = 0;
  for (Index c = 0; c < a.channels(); ++c) m = std::max(m, max_abs_diff(a.plane(c), b.plane(c)));
  return m;
}

/// Largest value of a - b over every pixel and channel.
inline double max_excess(const ImageF& a, const ImageF& b) {
  double m = -1e300;
  for (Index c = 0; c < a.channels(); ++c) m = std::max(m, (a.plane(c) - b.plane(c)).maxCoeff());
  return m;
}

/// Colour scene whose every pixel has one channel at exactly zero, so its
/// dark channel vanishes for any patch size.
inline ImageF dark_channel_zero_scene(Index w, Index h, std::uint64_t seed) {
  ImageF img = random_image(w, h, 3, seed, 0.05, 1.0);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) img(x, y, (x + 2 * y) % 3) = 0.0;
  return img;
}

/// Hazy test image k: a procedural scene behind perturbed synthetic fog.
inline FoggyImage hazy_fixture(int k, Index w = 96, Index h = 96) {
  static const char* presets[] = {"ramp", "corridor", "steps"};
  const ImageF scene = procedural_scene(w, h, 1000 + static_cast<std::uint64_t>(k));
  FogSpec spec;
  spec.beta = 0.8 + 0.3 * k;
  spec.perturb_amp = 0.1;
  spec.perturb_scale = 24;
  spec.seed = 77 + static_cast<std::uint64_t>(k);
  return synth_fog(scene, depth_preset(presets[k % 3], w, h, 4), spec);
}

struct CorpusItem {
  ImageF gt;
  ImageF hazy;
};

/// Synthetic evaluation corpus: haze-free procedural scenes with depth-driven fog.
inline std::vector<CorpusItem> synthetic_corpus(int count, Index w, Index h) {
  static const char* presets[] = {"ramp", "corridor", "steps"};
  std::vector<CorpusItem> out;
  for (int k = 0; k < count; ++k) {
    const ImageF gt = procedural_scene(w, h, 500 + static_cast<std::uint64_t>(k));
    FogSpec spec;
    spec.beta = 1.0 + 0.1 * (k % 5);
    spec.perturb_amp = 0.1;
    spec.seed = 900 + static_cast<std::uint64_t>(k);
    out.push_back({gt, synth_fog(gt, depth_preset(presets[k % 3], w, h, 4), spec).hazy});
  }
  return out;
}

// --- naive references -------------------------------------------------------

inline Plane naive_window_extremum(const Plane& p, Index r, bool take_max) {
  Plane out(p.rows(), p.cols());
  for (Index y = 0; y < p.rows(); ++y)
    for (Index x = 0; x < p.cols(); ++x) {
      double m = p(y, x);
      for (Index yy = std::max<Index>(0, y - r); yy <= std::min(p.rows() - 1, y + r); ++yy)
        for (Index xx = std::max<Index>(0, x - r); xx <= std::min(p.cols() - 1, x + r); ++xx)
          m = take_max ? std::max(m, p(yy, xx)) : std::min(m, p(yy, xx));
      out(y, x) = m;
    }
  return out;
}

inline Plane naive_box_mean(const Plane& p, Index r) {
  Plane out(p.rows(), p.cols());
  for (Index y = 0; y < p.rows(); ++y)
    for (Index x = 0; x < p.cols(); ++x) {
      double s = 0;
      int n = 0;
      for (Index yy = std::max<Index>(0, y - r); yy <= std::min(p.rows() - 1, y + r); ++yy)
        for (Index xx = std::max<Index>(0, x - r); xx <= std::min(p.cols() - 1, x + r); ++xx) {
          s += p(yy, xx);
          ++n;
        }
      out(y, x) = s / n;
    }
  return out;
}

/// Dense 2-D Gaussian convolution with mirrored borders.
inline Plane naive_gaussian(const Plane& p, double sigma) {
  const Index r = static_cast<Index>(std::ceil(3.0 * sigma));
  std::vector<double> g(static_cast<std::size_t>(2 * r + 1));
  double total = 0;
  for (Index i = -r; i <= r; ++i) total += g[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * double(i * i) / (sigma * sigma));
  auto mirror = [](Index i, Index n) {
    while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
    return i;
  };
  Plane out(p.rows(), p.cols());
  for (Index y = 0; y < p.rows(); ++y)
    for (Index x = 0; x < p.cols(); ++x) {
      double s = 0;
      for (Index dy = -r; dy <= r; ++dy)
        for (Index dx = -r; dx <= r; ++dx)
          s += g[static_cast<std::size_t>(dy + r)] * g[static_cast<std::size_t>(dx + r)] *
               p(mirror(y + dy, p.rows()), mirror(x + dx, p.cols()));
      out(y, x) = s / (total * total);
    }
  return out;
}

/// Guided filter by explicit least squares in every clipped window.
inline Plane naive_guided_filter(const ImageF& guide, const Plane& src, Index r, double reg) {
  const Index h = src.rows(), w = src.cols(), ch = guide.channels();
  std::vector<Eigen::VectorXd> a(static_cast<std::size_t>(w * h));
  std::vector<double> b(static_cast<std::size_t>(w * h));
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      Eigen::MatrixXd design(0, ch + 1);
      std::vector<Eigen::VectorXd> rows;
      std::vector<double> rhs;
      for (Index yy = std::max<Index>(0, y - r); yy <= std::min(h - 1, y + r); ++yy)
        for (Index xx = std::max<Index>(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
          Eigen::VectorXd row(ch + 1);
          for (Index c = 0; c < ch; ++c) row(c) = guide(xx, yy, c);
          row(ch) = 1.0;
          rows.push_back(row);
          rhs.push_back(src(yy, xx));
        }
      const auto n = static_cast<Index>(rows.size());
      design.resize(n, ch + 1);
      Eigen::VectorXd target(n);
      for (Index i = 0; i < n; ++i) {
        design.row(i) = rows[static_cast<std::size_t>(i)].transpose();
        target(i) = rhs[static_cast<std::size_t>(i)];
      }
      // Minimize (1/n)|D [a;b] - p|^2 + reg |a|^2.
      Eigen::MatrixXd normal = design.transpose() * design / double(n);
      for (Index c = 0; c < ch; ++c) normal(c, c) += reg;
      const Eigen::VectorXd sol = normal.ldlt().solve(design.transpose() * target / double(n));
      a[static_cast<std::size_t>(y * w + x)] = sol.head(ch);
      b[static_cast<std::size_t>(y * w + x)] = sol(ch);
    }
  Plane out(h, w);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      double s = 0;
      int n = 0;
      for (Index yy = std::max<Index>(0, y - r); yy <= std::min(h - 1, y + r); ++yy)
        for (Index xx = std::max<Index>(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
          const auto k = static_cast<std::size_t>(yy * w + xx);
          double v = b[k];
          for (Index c = 0; c < ch; ++c) v += a[k](c) * guide(x, y, c);
          s += v;
          ++n;
        }
      out(y, x) = s / n;
    }
  return out;
}

/// Kernel-based Retinex evaluated term by term over the truncated window.
inline ImageF naive_kbr(const ImageF& input, double sigma, Index window, ScalingFn f) {
  const ImageF img = clamp_floor(input);
  ImageF out(img.width(), img.height(), img.channels());
  for (Index c = 0; c < img.channels(); ++c)
    for (Index y = 0; y < img.height(); ++y)
      for (Index x = 0; x < img.width(); ++x) {
        double num = 0, den = 0;
        for (Index yy = 0; yy < img.height(); ++yy)
          for (Index xx = 0; xx < img.width(); ++xx) {
            if (std::abs(xx - x) > window || std::abs(yy - y) > window) continue;
            const double wt = std::exp(-0.5 * double((xx - x) * (xx - x) + (yy - y) * (yy - y)) / (sigma * sigma));
            const double ratio = std::min(1.0, img(x, y, c) / img(xx, yy, c));
            num += wt * (f == ScalingFn::identity ? ratio : std::log(ratio));
            den += wt;
          }
        out(x, y, c) = f == ScalingFn::identity ? num / den : std::exp(num / den);
      }
  return out;
}

/// Light RSR from a single spray's local white, with window sums spelled out.
inline ImageF naive_lrsr(const ImageF& input, const SprayConfig& cfg, int k1, int k2) {
  const ImageF img = clamp_floor(input, cfg.eps);
  SprayConfig one = cfg;
  one.sprays = 1;
  const ImageF white = spray_max(img, one, 0);
  ImageF out(img.width(), img.height(), img.channels());
  for (Index c = 0; c < img.channels(); ++c) {
    const Plane ratio = img.plane(c) / white.plane(c);
    const Plane sr = naive_box_mean(ratio, (k2 - 1) / 2);
    const Plane si = naive_box_mean(img.plane(c), (k1 - 1) / 2);
    for (Index y = 0; y < img.height(); ++y)
      for (Index x = 0; x < img.width(); ++x) out(x, y, c) = std::clamp(sr(y, x) * img(x, y, c) / si(y, x), 0.0, 1.0);
  }
  return out;
}

/// SSIM from its definition: weighted window statistics computed per window.
inline double naive_ssim(const ImageF& a, const ImageF& b) {
  const Plane x = luma(a), y = luma(b);
  double g[11][11], total = 0;
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) total += g[i][j] = std::exp(-double((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
  const double c1 = 1e-4, c2 = 9e-4;
  double sum = 0;
  int n = 0;
  for (Index y0 = 0; y0 + 11 <= x.rows(); ++y0)
    for (Index x0 = 0; x0 + 11 <= x.cols(); ++x0) {
      double mx = 0, my = 0;
      for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
          mx += g[i][j] / total * x(y0 + i, x0 + j);
          my += g[i][j] / total * y(y0 + i, x0 + j);
        }
      double vx = 0, vy = 0, cxy = 0;
      for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
          const double w = g[i][j] / total;
          const double dx = x(y0 + i, x0 + j) - mx, dy = y(y0 + i, x0 + j) - my;
          vx += w * dx * dx;
          vy += w * dy * dy;
          cxy += w * dx * dy;
        }
      sum += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++n;
    }
  return sum / n;
}

/// Published CIEDE2000 test pairs (L1 a1 b1 L2 a2 b2 dE00).
inline const std::vector<std::array<double, 7>>& ciede2000_pairs() {
  static const std::vector<std::array<double, 7>> pairs = {
      {50.0000, 2.6772, -79.7751, 50.0000, 0.0000, -82.7485, 2.0425},
      {50.0000, 3.1571, -77.2803, 50.0000, 0.0000, -82.7485, 2.8615},
      {50.0000, 2.8361, -74.0200, 50.0000, 0.0000, -82.7485, 3.4412},
      {50.0000, -1.3802, -84.2814, 50.0000, 0.0000, -82.7485, 1.0000},
      {50.0000, -1.1848, -84.8006, 50.0000, 0.0000, -82.7485, 1.0000},
      {50.0000, -0.9009, -85.5211, 50.0000, 0.0000, -82.7485, 1.0000},
      {50.0000, 0.0000, 0.0000, 50.0000, -1.0000, 2.0000, 2.3669},
      {50.0000, -1.0000, 2.0000, 50.0000, 0.0000, 0.0000, 2.3669},
      {50.0000, 2.4900, -0.0010, 50.0000, -2.4900, 0.0009, 7.1792},
      {50.0000, 2.4900, -0.0010, 50.0000, -2.4900, 0.0010, 7.1792},
      {50.0000, 2.4900, -0.0010, 50.0000, -2.4900, 0.0011, 7.2195},
      {50.0000, 2.4900, -0.0010, 50.0000, -2.4900, 0.0012, 7.2195},
      {50.0000, -0.0010, 2.4900, 50.0000, 0.0009, -2.4900, 4.8045},
      {50.0000, -0.0010, 2.4900, 50.0000, 0.0010, -2.4900, 4.8045},
      {50.0000, -0.0010, 2.4900, 50.0000, 0.0011, -2.4900, 4.7461},
      {50.0000, 2.5000, 0.0000, 50.0000, 0.0000, -2.5000, 4.3065},
      {50.0000, 2.5000, 0.0000, 73.0000, 25.0000, -18.0000, 27.1492},
      {50.0000, 2.5000, 0.0000, 61.0000, -5.0000, 29.0000, 22.8977},
      {50.0000, 2.5000, 0.0000, 56.0000, -27.0000, -3.0000, 31.9030},
      {50.0000, 2.5000, 0.0000, 58.0000, 24.0000, 15.0000, 19.4535},
      {50.0000, 2.5000, 0.0000, 50.0000, 3.1736, 0.5854, 1.0000},
      {50.0000, 2.5000, 0.0000, 50.0000, 3.2972, 0.0000, 1.0000},
      {50.0000, 2.5000, 0.0000, 50.0000, 1.8634, 0.5757, 1.0000},
      {50.0000, 2.5000, 0.0000, 50.0000, 3.2592, 0.3350, 1.0000},
      {60.2574, -34.0099, 36.2677, 60.4626, -34.1751, 39.4387, 1.2644},
      {63.0109, -31.0961, -5.8663, 62.8187, -29.7946, -4.0864, 1.2630},
      {61.2901, 3.7196, -5.3901, 61.4292, 2.2480, -4.9620, 1.8731},
      {35.0831, -44.1164, 3.7933, 35.0232, -40.0716, 1.5901, 1.8645},
      {22.7233, 20.0904, -46.6940, 23.0331, 14.9730, -42.5619, 2.0373},
      {36.4612, 47.8580, 18.3852, 36.2715, 50.5065, 21.2231, 1.4146},
      {90.8027, -2.0831, 1.4410, 91.1528, -1.6435, 0.0447, 1.4441},
      {90.9257, -0.5406, -0.9208, 88.6381, -0.8985, -0.7239, 1.5381},
      {6.7747, -0.2908, -2.4247, 5.8714, -0.0985, -2.2286, 0.6377},
      {2.0776, 0.0795, -1.1350, 0.9033, -0.0636, -0.5514, 0.9082},
  };
  return pairs;
}

}  // namespace rdh::test
