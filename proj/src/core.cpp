#include "rdh/core.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rdh {
namespace {

constexpr double kDegenerateRange = 1e-6;

std::vector<double> pooled_values(const ImageF& img) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(img.size()));
  for (const auto& p : img.planes()) v.insert(v.end(), p.data(), p.data() + p.size());
  return v;
}

// Quantile on an unsorted buffer; reorders `v`.
double quantile_inplace(std::vector<double>& v, double q) {
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double a = v[lo];
  if (frac == 0.0 || lo + 1 >= v.size()) return a;
  const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
  return a + frac * (b - a);
}

void check_fractions(double p_low, double p_high) {
  if (p_low < 0 || p_high < 0 || p_low + p_high >= 1)
    throw std::invalid_argument("percentile_rescale: need p_low, p_high >= 0 and p_low + p_high < 1");
}

std::pair<double, double> rescale_bounds(const ImageF& img, double p_low, double p_high) {
  check_fractions(p_low, p_high);
  std::vector<double> v = pooled_values(img);
  const double lo = quantile_inplace(v, p_low);
  const double hi = quantile_inplace(v, 1.0 - p_high);
  return {lo, hi};
}

}  // namespace

ImageF invert(const ImageF& img) {
  return map_planes(img, [](const Plane& p) { return Plane(1.0 - p); });
}

ImageF clamp_floor(const ImageF& img, EpsilonPolicy eps) {
  return map_planes(img, [f = eps.floor()](const Plane& p) { return Plane(p.max(f)); });
}

double joint_quantile(const ImageF& img, double q) {
  std::vector<double> v = pooled_values(img);
  return quantile_inplace(v, q);
}

bool rescale_is_degenerate(const ImageF& img, double p_low, double p_high) {
  const auto [lo, hi] = rescale_bounds(img, p_low, p_high);
  return hi - lo < kDegenerateRange;
}

ImageF percentile_rescale(const ImageF& img, double p_low, double p_high) {
  const auto [lo, hi] = rescale_bounds(img, p_low, p_high);
  if (hi - lo < kDegenerateRange) return img;
  const double scale = 1.0 / (hi - lo);
  return map_planes(img, [&](const Plane& p) { return Plane(((p - lo) * scale).max(0.0).min(1.0)); });
}

ImageF hist_equalize(const ImageF& img, int bins) {
  if (bins < 2) throw std::invalid_argument("hist_equalize: bins must be >= 2");
  const auto nb = static_cast<std::size_t>(bins);
  auto bin_of = [&](double v) {
    const double b = std::floor(std::clamp(v, 0.0, 1.0) * bins);
    return std::min(nb - 1, static_cast<std::size_t>(b));
  };
  return map_planes(img, [&](const Plane& p) {
    std::vector<double> cdf(nb, 0.0);
    for (Index i = 0; i < p.size(); ++i) cdf[bin_of(p.data()[i])] += 1.0;
    double run = 0;
    for (auto& c : cdf) {
      run += c;
      c = run / static_cast<double>(p.size());
    }
    Plane out(p.rows(), p.cols());
    for (Index i = 0; i < p.size(); ++i) out.data()[i] = cdf[bin_of(p.data()[i])];
    return out;
  });
}

}  // namespace rdh
