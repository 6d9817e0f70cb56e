#include "rdh/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "rdh/filters.hpp"

namespace rdh {
namespace {

void require_same_shape(const ImageF& a, const ImageF& b, const char* what) {
  if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": image dimensions differ");
}

constexpr Index kSide = 11;

// Gaussian-weighted mean over every fully contained 11x11 window.
Plane ssim_window_mean(const Plane& p) {
  static const Eigen::ArrayXd k = [] {
    Eigen::ArrayXd taps(kSide);
    for (Index i = 0; i < kSide; ++i) {
      const double d = static_cast<double>(i - kSide / 2);
      taps(i) = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    }
    return Eigen::ArrayXd(taps / taps.sum());
  }();
  const Index h = p.rows() - kSide + 1, w = p.cols() - kSide + 1;
  Plane horiz = Plane::Zero(p.rows(), w);
  for (Index j = 0; j < kSide; ++j) horiz += k(j) * p.middleCols(j, w);
  Plane out = Plane::Zero(h, w);
  for (Index j = 0; j < kSide; ++j) out += k(j) * horiz.middleRows(j, h);
  return out;
}

double deg(double rad) { return rad * 180.0 / std::numbers::pi; }
double rad(double deg) { return deg * std::numbers::pi / 180.0; }

Plane sobel_magnitude(const Plane& p) {
  const Index h = p.rows(), w = p.cols();
  Plane mag(h, w);
  auto at = [&](Index y, Index x) { return p(reflect_index(y, h), reflect_index(x, w)); };
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      const double gx = (at(y - 1, x + 1) + 2 * at(y, x + 1) + at(y + 1, x + 1)) -
                        (at(y - 1, x - 1) + 2 * at(y, x - 1) + at(y + 1, x - 1));
      const double gy = (at(y + 1, x - 1) + 2 * at(y + 1, x) + at(y + 1, x + 1)) -
                        (at(y - 1, x - 1) + 2 * at(y - 1, x) + at(y - 1, x + 1));
      mag(y, x) = std::sqrt(gx * gx + gy * gy) / 8.0;
    }
  return mag;
}

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> visible_edges(const Plane& luma_plane,
                                                                                 const Plane& grad) {
  const Plane hi = max_filter<double>(luma_plane, 1);
  const Plane lo = min_filter<double>(luma_plane, 1);
  const Plane sum = hi + lo;
  const Plane contrast = (sum > 0).select((hi - lo) / sum.max(1e-300), 0.0);
  return (contrast > kVisibleContrast) && (grad > 0.0);
}

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> saturated(const Plane& luma_plane) {
  constexpr double kHalfCode = 0.5 / 255.0;
  return (luma_plane < kHalfCode) || (luma_plane > 1.0 - kHalfCode);
}

void append_number(std::string& out, const std::optional<double>& v) {
  if (!v) return;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), *v);
  out.append(buf, res.ptr);
}

// RFC 4180 quoting; method strings carry commas.
std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

double ssim(const ImageF& a, const ImageF& b) {
  require_same_shape(a, b, "ssim");
  if (a.width() < 11 || a.height() < 11) throw std::invalid_argument("ssim: images must be at least 11x11");
  constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
  const Plane x = luma(a), y = luma(b);
  const Plane mx = ssim_window_mean(x), my = ssim_window_mean(y);
  const Plane sxx = ssim_window_mean(x * x) - mx * mx;
  const Plane syy = ssim_window_mean(y * y) - my * my;
  const Plane sxy = ssim_window_mean(x * y) - mx * my;
  const Plane map = ((2 * mx * my + c1) * (2 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2));
  return map.mean();
}

double cpsnr(const ImageF& a, const ImageF& b) {
  require_same_shape(a, b, "cpsnr");
  double sse = 0;
  for (Index c = 0; c < a.channels(); ++c) sse += (a.plane(c) - b.plane(c)).square().sum();
  const double mse = sse / static_cast<double>(a.size());
  if (mse <= 0) return kCpsnrCap;
  return std::min(kCpsnrCap, 10.0 * std::log10(1.0 / mse));
}

Lab srgb_to_lab(double r, double g, double b) {
  auto linear = [](double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); };
  const double R = linear(r), G = linear(g), B = linear(b);
  const double X = 0.4124564 * R + 0.3575761 * G + 0.1804375 * B;
  const double Y = 0.2126729 * R + 0.7151522 * G + 0.0721750 * B;
  const double Z = 0.0193339 * R + 0.1191920 * G + 0.9503041 * B;
  constexpr double delta = 6.0 / 29.0;
  auto f = [&](double t) { return t > delta * delta * delta ? std::cbrt(t) : t / (3 * delta * delta) + 4.0 / 29.0; };
  const double fx = f(X / 0.95047), fy = f(Y / 1.0), fz = f(Z / 1.08883);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

double ciede2000(const Lab& x, const Lab& y) {
  constexpr double pow25_7 = 6103515625.0;  // 25^7
  const double c1 = std::hypot(x.a, x.b), c2 = std::hypot(y.a, y.b);
  const double cbar7 = std::pow(0.5 * (c1 + c2), 7);
  const double g = 0.5 * (1.0 - std::sqrt(cbar7 / (cbar7 + pow25_7)));
  const double a1 = (1 + g) * x.a, a2 = (1 + g) * y.a;
  const double cp1 = std::hypot(a1, x.b), cp2 = std::hypot(a2, y.b);
  auto hue = [](double b, double a) {
    if (a == 0 && b == 0) return 0.0;
    const double h = deg(std::atan2(b, a));
    return h < 0 ? h + 360.0 : h;
  };
  const double h1 = hue(x.b, a1), h2 = hue(y.b, a2);

  const double dL = y.L - x.L;
  const double dC = cp2 - cp1;
  double dh = 0;
  if (cp1 * cp2 != 0) {
    dh = h2 - h1;
    if (dh > 180) dh -= 360;
    else if (dh < -180) dh += 360;
  }
  const double dH = 2 * std::sqrt(cp1 * cp2) * std::sin(rad(dh / 2));

  const double lbar = 0.5 * (x.L + y.L);
  const double cbar_p = 0.5 * (cp1 + cp2);
  double hbar = h1 + h2;
  if (cp1 * cp2 != 0) {
    if (std::abs(h1 - h2) <= 180) hbar = 0.5 * (h1 + h2);
    else if (h1 + h2 < 360) hbar = 0.5 * (h1 + h2 + 360);
    else hbar = 0.5 * (h1 + h2 - 360);
  }
  const double t = 1 - 0.17 * std::cos(rad(hbar - 30)) + 0.24 * std::cos(rad(2 * hbar)) +
                   0.32 * std::cos(rad(3 * hbar + 6)) - 0.20 * std::cos(rad(4 * hbar - 63));
  const double dtheta = 30 * std::exp(-std::pow((hbar - 275) / 25, 2));
  const double cbar_p7 = std::pow(cbar_p, 7);
  const double rc = 2 * std::sqrt(cbar_p7 / (cbar_p7 + pow25_7));
  const double l50 = (lbar - 50) * (lbar - 50);
  const double sl = 1 + 0.015 * l50 / std::sqrt(20 + l50);
  const double sc = 1 + 0.045 * cbar_p;
  const double sh = 1 + 0.015 * cbar_p * t;
  const double rt = -std::sin(rad(2 * dtheta)) * rc;
  const double tl = dL / sl, tc = dC / sc, th = dH / sh;
  return std::sqrt(tl * tl + tc * tc + th * th + rt * tc * th);
}

double de00(const ImageF& a, const ImageF& b) {
  require_same_shape(a, b, "de00");
  const auto channel = [](const ImageF& img, Index c) -> const Plane& { return img.plane(img.channels() == 1 ? 0 : c); };
  double total = 0;
  for (Index i = 0; i < a.pixels(); ++i) {
    const Lab la = srgb_to_lab(channel(a, 0).data()[i], channel(a, 1).data()[i], channel(a, 2).data()[i]);
    const Lab lb = srgb_to_lab(channel(b, 0).data()[i], channel(b, 1).data()[i], channel(b, 2).data()[i]);
    total += ciede2000(la, lb);
  }
  return total / static_cast<double>(a.pixels());
}

Visibility visibility_metrics(const ImageF& before, const ImageF& after) {
  if (!before.same_extent(after)) throw std::invalid_argument("visibility_metrics: image dimensions differ");
  const Plane lb = luma(before), la = luma(after);
  const Plane gb = sobel_magnitude(lb), ga = sobel_magnitude(la);
  const auto vb = visible_edges(lb, gb), va = visible_edges(la, ga);

  Visibility v;
  const auto n_before = vb.count(), n_after = va.count();
  if (n_before > 0) v.e = static_cast<double>(n_after - n_before) / static_cast<double>(n_before);

  double log_sum = 0;
  Index n = 0;
  for (Index i = 0; i < la.size(); ++i) {
    if (va.data()[i] && gb.data()[i] > 0) {
      log_sum += std::log(ga.data()[i] / gb.data()[i]);
      ++n;
    }
  }
  if (n > 0) v.r = std::exp(log_sum / static_cast<double>(n));

  const auto newly = (saturated(la) && !saturated(lb)).count();
  v.sigma = 100.0 * static_cast<double>(newly) / static_cast<double>(la.size());
  return v;
}

std::string csv_header() { return "id,method,ssim,cpsnr,de00,e,r,sigma"; }

std::string csv_row(const MetricReport& report) {
  std::string out = csv_field(report.id) + "," + csv_field(report.method);
  for (const auto* field : {&report.ssim, &report.cpsnr, &report.de00, &report.e, &report.r, &report.sigma}) {
    out += ',';
    append_number(out, *field);
  }
  return out;
}

std::vector<MetricReport> aggregate_means(const std::vector<MetricReport>& rows) {
  struct Acc {
    std::array<double, 6> sum{};
    std::array<int, 6> count{};
  };
  std::vector<std::string> order;
  std::map<std::string, Acc> acc;
  for (const auto& r : rows) {
    if (!acc.count(r.method)) order.push_back(r.method);
    Acc& a = acc[r.method];
    const std::array<const std::optional<double>*, 6> fields{&r.ssim, &r.cpsnr, &r.de00, &r.e, &r.r, &r.sigma};
    for (std::size_t k = 0; k < 6; ++k)
      if (*fields[k]) {
        a.sum[k] += **fields[k];
        ++a.count[k];
      }
  }
  std::vector<MetricReport> out;
  for (const auto& m : order) {
    const Acc& a = acc[m];
    MetricReport r{"mean", m, {}, {}, {}, {}, {}, {}};
    const std::array<std::optional<double>*, 6> fields{&r.ssim, &r.cpsnr, &r.de00, &r.e, &r.r, &r.sigma};
    for (std::size_t k = 0; k < 6; ++k)
      if (a.count[k] > 0) *fields[k] = a.sum[k] / a.count[k];
    out.push_back(r);
  }
  return out;
}

}  // namespace rdh
