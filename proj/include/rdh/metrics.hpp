#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rdh/image.hpp"

namespace rdh {

/// Mean SSIM on Rec.601 luma: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range 1, evaluated where the window fits entirely.
double ssim(const ImageF& a, const ImageF& b);

/// 10 log10(1 / MSE) with MSE pooled over every channel; capped at 99 dB.
double cpsnr(const ImageF& a, const ImageF& b);
inline constexpr double kCpsnrCap = 99.0;

struct Lab {
  double L, a, b;
};

/// sRGB (D65, 2 degree observer) to CIELAB.
Lab srgb_to_lab(double r, double g, double b);

/// CIEDE2000 colour difference with kL = kC = kH = 1.
double ciede2000(const Lab& x, const Lab& y);

/// Mean per-pixel CIEDE2000; gray images are treated as neutral RGB.
double de00(const ImageF& a, const ImageF& b);

/// Blind visibility indicators of an enhancement `before -> after`, on luma.
/// A visible edge is a pixel with non-zero Sobel gradient whose 3x3
/// Michelson contrast exceeds 5%.
///   e     = (n_after - n_before) / n_before, absent when n_before == 0
///   r     = geometric mean of |grad after| / |grad before| over visible
///           edges of `after` (pixels with zero gradient before are skipped)
///   sigma = percentage of pixels saturated (luma within half an 8-bit code
///           of 0 or 1) in `after` but not in `before`
struct Visibility {
  std::optional<double> e;
  std::optional<double> r;
  double sigma = 0.0;
};

Visibility visibility_metrics(const ImageF& before, const ImageF& after);

/// Threshold on local Michelson contrast used for visible edges.
inline constexpr double kVisibleContrast = 0.05;

/// Per-row record of a CSV report. Absent metrics stay empty, never zero.
struct MetricReport {
  std::string id;
  std::string method;
  std::optional<double> ssim, cpsnr, de00, e, r, sigma;
};

/// Constant header: id,method,ssim,cpsnr,de00,e,r,sigma. Fields holding a
/// comma or quote are quoted as in RFC 4180.
std::string csv_header();
std::string csv_row(const MetricReport& report);

/// One aggregate row per method (in first-seen order) with id "mean": each
/// metric averaged over the rows where it is present.
std::vector<MetricReport> aggregate_means(const std::vector<MetricReport>& rows);

}  // namespace rdh
