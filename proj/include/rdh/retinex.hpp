#pragma once

// Retinex lightness estimators. Every estimator processes channels
// independently and returns an image in [0,1]. The ratio-based variants
// (paths, sprays, kernel) never decrease a pixel's intensity; the
// log-domain variants (SSR, MSR, homomorphic) are mapped back to [0,1] with a
// 1%/1% percentile stretch.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rdh/core.hpp"
#include "rdh/image.hpp"

namespace rdh {

/// Non-decreasing scaling applied to reset ratios r = I(x)/I(y) <= 1.
/// `identity` averages the ratios; `logarithm` averages log r and maps the
/// result back with exp, i.e. a geometric mean of the same ratios.
enum class ScalingFn { identity, logarithm };

struct PathConfig {
  int num_paths = 50;
  int path_length = 0;  ///< steps per walk; 0 selects 2 * (width + height)
  std::uint64_t seed = 0;
  ScalingFn f = ScalingFn::identity;
  EpsilonPolicy eps{};
};

struct SprayConfig {
  int samples = 75;      ///< n, points per spray
  int sprays = 20;       ///< N, sprays averaged per pixel
  double radius = 0.0;   ///< 0 selects the image diagonal
  std::uint64_t seed = 0;
  EpsilonPolicy eps{};
};

/// Weighted surround scales for multi-scale Retinex.
class ScaleBank {
 public:
  struct Scale {
    double sigma;
    double weight;
  };

  ScaleBank();  ///< sigma {15, 80, 250}, equal weights
  explicit ScaleBank(std::vector<Scale> scales);

  const std::vector<Scale>& scales() const { return scales_; }

 private:
  std::vector<Scale> scales_;
};

// --- Path-based Retinex with reset --------------------------------------

/// Lightness of the last element of an explicit path under the reset rule:
/// path.back() / max(path).
double path_lightness(std::span<const double> path);

ImageF path_retinex(const ImageF& img, const PathConfig& cfg = {});

// --- Random sprays -------------------------------------------------------

/// Maximum, per channel, of I over spray `spray_index` around every pixel
/// (the pixel itself is always part of its spray). Input is floored first.
ImageF spray_max(const ImageF& img, const SprayConfig& cfg, int spray_index);

/// One spray's ratio I(x) / max_spray I at a single pixel, for channel `c`
/// of an already floored image. Exposed for statistical checks.
double spray_ratio(const ImageF& floored, Index x, Index y, Index c, const SprayConfig& cfg, int spray_index);

ImageF rsr(const ImageF& img, const SprayConfig& cfg = {});

/// Light RSR: one spray per pixel, then the ratio image R = I / spray_max
/// and the input are box-smoothed with odd kernel sides k2 and k1:
///   l = I * box_k2(R) / box_k1(I), clipped to [0,1].
ImageF lrsr(const ImageF& img, const SprayConfig& cfg, int k1 = 25, int k2 = 25);

// --- Kernel-based Retinex ------------------------------------------------

struct KernelRetinexConfig {
  double omega_sigma = 10.0;
  Index window = 0;  ///< half-width of the square support; 0 selects ceil(3 * omega_sigma)
  ScalingFn f = ScalingFn::identity;
  EpsilonPolicy eps{};
};

ImageF kbr(const ImageF& img, const KernelRetinexConfig& cfg = {});

// --- Center/surround -----------------------------------------------------

/// log I - log(G_sigma * I) per channel, on the floored image. Unbounded.
ImageF ssr_log(const ImageF& img, double sigma, EpsilonPolicy eps = {});

/// sum_k w_k * ssr_log(img, sigma_k). Unbounded.
ImageF msr_log(const ImageF& img, const ScaleBank& bank, EpsilonPolicy eps = {});

/// exp(log I - G_sigma * log I) per channel. Positive, unbounded above.
ImageF homomorphic_raw(const ImageF& img, double sigma, EpsilonPolicy eps = {});

/// Maps a raw center/surround output to [0,1] with a 1%/1% percentile
/// stretch. A degenerate (uniform) raw map means every pixel equals its
/// surround and becomes the all-ones image.
ImageF rescale_surround_output(const ImageF& raw, double p_low = 0.01, double p_high = 0.01);

ImageF ssr(const ImageF& img, double sigma = 80.0, EpsilonPolicy eps = {});
ImageF msr(const ImageF& img, const ScaleBank& bank = {}, EpsilonPolicy eps = {});
ImageF homomorphic(const ImageF& img, double sigma = 80.0, EpsilonPolicy eps = {});

}  // namespace rdh
