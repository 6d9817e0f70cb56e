#pragma once

#include <stdexcept>

#include "rdh/image.hpp"

namespace rdh {

/// Positive floor applied before any ratio or logarithm; keeps pixel values
/// inside the half-open domain (0, 1] that ratio-based Retinex assumes.
class EpsilonPolicy {
 public:
  static constexpr double kDefaultFloor = 1.0 / 255.0;

  constexpr EpsilonPolicy() = default;
  explicit EpsilonPolicy(double floor) : floor_(floor) {
    if (!(floor > 0.0 && floor < 0.1)) throw std::invalid_argument("EpsilonPolicy: floor must lie in (0, 0.1)");
  }
  constexpr double floor() const { return floor_; }

 private:
  double floor_ = kDefaultFloor;
};

/// 1 - img, channel by channel.
ImageF invert(const ImageF& img);

/// max(img, floor) elementwise.
ImageF clamp_floor(const ImageF& img, EpsilonPolicy eps = {});

/// Linear-interpolated quantile over every value of every channel
/// (position q * (n - 1) in sorted order).
double joint_quantile(const ImageF& img, double q);

/// Affine stretch sending the p_low quantile to 0 and the (1 - p_high)
/// quantile to 1, clipped to [0,1]. Quantiles are pooled across channels so
/// hue is not shifted. Returns the input unchanged when the quantile range
/// is below 1e-6.
ImageF percentile_rescale(const ImageF& img, double p_low = 0.01, double p_high = 0.01);

/// True when percentile_rescale would hit its degenerate-range rule.
bool rescale_is_degenerate(const ImageF& img, double p_low = 0.01, double p_high = 0.01);

/// Per-channel histogram equalization: each value maps to the empirical CDF
/// of its bin, CDF(b) = #{v : bin(v) <= b} / N.
ImageF hist_equalize(const ImageF& img, int bins = 256);

}  // namespace rdh
