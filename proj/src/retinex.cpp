#include "rdh/retinex.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rdh/filters.hpp"
#include "rdh/parallel.hpp"
#include "rdh/random.hpp"

namespace rdh {
namespace {

// Channel-interleaved copy for random access: one cache line per pixel
// instead of one per channel.
struct Interleaved {
  Index w, h, ch;
  std::vector<double> v;

  explicit Interleaved(const ImageF& img) : w(img.width()), h(img.height()), ch(img.channels()) {
    v.resize(static_cast<std::size_t>(w * h * ch));
    for (Index c = 0; c < ch; ++c) {
      const double* src = img.plane(c).data();
      for (Index i = 0; i < w * h; ++i) v[static_cast<std::size_t>(i * ch + c)] = src[i];
    }
  }
  const double* at(Index linear) const { return v.data() + linear * ch; }
};

void check_spray(const SprayConfig& cfg) {
  if (cfg.samples < 1 || cfg.sprays < 1) throw std::invalid_argument("spray config: n and N must be >= 1");
  if (cfg.radius < 0) throw std::invalid_argument("spray config: radius must be positive");
}

double spray_radius(const SprayConfig& cfg, const ImageF& img) {
  if (cfg.radius > 0) return cfg.radius;
  return std::hypot(static_cast<double>(img.width()), static_cast<double>(img.height()));
}

// floor(v + 0.5) without a libm call.
inline Index round_half_up(double v) {
  const double t = v + 0.5;
  const auto i = static_cast<Index>(t);
  return i - (static_cast<double>(i) > t);
}

constexpr int kAngleBits = 16;
constexpr int kQuarterBits = kAngleBits - 2;
constexpr int kMaxAttempts = 64;
constexpr double kSignX[4] = {1, -1, -1, 1};
constexpr double kSignY[4] = {1, 1, -1, -1};

// cos of the angles in the first quadrant; the other quadrants and sin
// follow by symmetry. 64 KiB keeps it cache resident.
const std::array<float, (1 << kQuarterBits)>& quarter_cos() {
  static const auto table = [] {
    std::array<float, (1 << kQuarterBits)> t{};
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double theta = 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) / (1 << kAngleBits);
      t[k] = static_cast<float>(std::cos(theta));
    }
    return t;
  }();
  return table;
}

// Spray point: radius R*u with u uniform in (0,1] and a uniform angle, which
// gives an area density decreasing as 1/r. Points falling outside the image
// are redrawn; if every attempt misses, the center pixel stands in.
struct SprayDrawer {
  Index w, h;
  double radius;
  const float* qc = quarter_cos().data();

  // Farthest corner distance plus rounding slack.
  double reach(Index x, Index y) const {
    const double dx = static_cast<double>(std::max(x, w - 1 - x));
    const double dy = static_cast<double>(std::max(y, h - 1 - y));
    return std::sqrt(dx * dx + dy * dy) + 1.0;
  }

  // Attempts are evaluated in fixed-size batches without branching; the first
  // hit in attempt order wins, exactly as a sequential redraw loop would.
  // `reach` replaces the radius when smaller: larger draws could never land.
  Index draw(std::uint64_t key, int sample, Index x, Index y, double reach) const {
    constexpr unsigned quarter = (1u << kQuarterBits) - 1;
    constexpr int batch = 2;
    const double scale = std::min(radius, reach) * 0x1.0p-40;
    const std::uint64_t base = static_cast<std::uint64_t>(sample) * kMaxAttempts + 1;
    for (int first = 0; first < kMaxAttempts; first += batch) {
      Index pos[batch];
      unsigned hits = 0;
      for (int a = 0; a < batch; ++a) {
        const std::uint64_t bits = splitmix64(key + (base + first + a) * 0x9e3779b97f4a7c15ULL);
        const double r = scale * static_cast<double>((bits >> 24) + 1);
        const unsigned j = static_cast<unsigned>(bits) & quarter;
        // Rotate (cos, sin) of the first-quadrant angle by q quarter turns.
        const unsigned q = static_cast<unsigned>(bits >> kQuarterBits) & 3u;
        const double cs[2] = {qc[j], qc[quarter - j]};
        const Index sx = x + round_half_up(r * kSignX[q] * cs[q & 1u]);
        const Index sy = y + round_half_up(r * kSignY[q] * cs[(q & 1u) ^ 1u]);
        const bool inside = (sx >= 0) & (sx < w) & (sy >= 0) & (sy < h);
        hits |= static_cast<unsigned>(inside) << a;
        pos[a] = sy * w + sx;
      }
      if (hits != 0) return pos[std::countr_zero(hits)];
    }
    return y * w + x;
  }
  Index draw(std::uint64_t key, int sample, Index x, Index y) const { return draw(key, sample, x, y, reach(x, y)); }
};

std::uint64_t spray_key(std::uint64_t seed, Index pixel, int spray) {
  return counter_hash(seed, static_cast<std::uint64_t>(pixel), static_cast<std::uint64_t>(spray));
}

// Runs `visit(x, y, max_per_channel)` for one spray at every pixel.
template <typename Visit>
void for_each_spray_max(const Interleaved& img, const SprayConfig& cfg, double radius, int spray, Visit&& visit) {
  const SprayDrawer drawer{img.w, img.h, radius};
  parallel_for(img.h, [&](Index y0, Index y1) {
    std::array<double, 3> m{};
    for (Index y = y0; y < y1; ++y) {
      for (Index x = 0; x < img.w; ++x) {
        const Index linear = y * img.w + x;
        const double* center = img.at(linear);
        for (Index c = 0; c < img.ch; ++c) m[c] = center[c];
        const std::uint64_t key = spray_key(cfg.seed, linear, spray);
        const double reach = drawer.reach(x, y);
        for (int s = 0; s < cfg.samples; ++s) {
          const double* p = img.at(drawer.draw(key, s, x, y, reach));
          for (Index c = 0; c < img.ch; ++c) m[c] = std::max(m[c], p[c]);
        }
        visit(x, y, m);
      }
    }
  });
}

ImageF mean_lightness(ImageF acc, ScalingFn f, double count) {
  return map_planes(acc, [&](const Plane& p) {
    return f == ScalingFn::identity ? Plane(p / count) : Plane((p / count).exp());
  });
}

}  // namespace

ScaleBank::ScaleBank() : ScaleBank({{15.0, 1.0 / 3.0}, {80.0, 1.0 / 3.0}, {250.0, 1.0 / 3.0}}) {}

ScaleBank::ScaleBank(std::vector<Scale> scales) : scales_(std::move(scales)) {
  if (scales_.empty()) throw std::invalid_argument("ScaleBank: at least one scale required");
  double total = 0;
  for (const auto& s : scales_) {
    if (!(s.sigma > 0)) throw std::invalid_argument("ScaleBank: sigmas must be positive");
    if (!(s.weight > 0)) throw std::invalid_argument("ScaleBank: weights must be positive");
    total += s.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("ScaleBank: weights must sum to 1");
}

double path_lightness(std::span<const double> path) {
  if (path.empty()) throw std::invalid_argument("path_lightness: empty path");
  return path.back() / *std::max_element(path.begin(), path.end());
}

ImageF path_retinex(const ImageF& input, const PathConfig& cfg) {
  if (cfg.num_paths < 1 || cfg.path_length < 0) throw std::invalid_argument("path config: N >= 1 and length >= 1 required");
  const ImageF img = clamp_floor(input, cfg.eps);
  const Interleaved px(img);
  const Index w = img.width(), h = img.height(), ch = img.channels();
  const int length = cfg.path_length > 0 ? cfg.path_length : static_cast<int>(2 * (w + h));
  ImageF acc(w, h, ch, 0.0);

  parallel_for(h, [&](Index y0, Index y1) {
    std::array<double, 3> m{};
    for (Index y = y0; y < y1; ++y) {
      for (Index x = 0; x < w; ++x) {
        const Index linear = y * w + x;
        const double* center = px.at(linear);
        std::array<double, 3> sum{};
        for (int k = 0; k < cfg.num_paths; ++k) {
          // A walk that ends at x, generated backwards from x.
          CounterStream stream(cfg.seed, static_cast<std::uint64_t>(linear), static_cast<std::uint64_t>(k));
          Index cx = x, cy = y;
          for (Index c = 0; c < ch; ++c) m[c] = center[c];
          std::uint64_t bits = 0;
          for (int step = 0; step < length; ++step) {
            if (step % 32 == 0) bits = stream.next();
            const unsigned dir = bits & 3u;
            bits >>= 2;
            Index dx = dir == 0 ? 1 : dir == 1 ? -1 : 0;
            Index dy = dir == 2 ? 1 : dir == 3 ? -1 : 0;
            // Steps leaving the image bounce back off the border.
            if (cx + dx < 0 || cx + dx >= w) dx = w > 1 ? -dx : 0;
            if (cy + dy < 0 || cy + dy >= h) dy = h > 1 ? -dy : 0;
            cx += dx;
            cy += dy;
            const double* p = px.at(cy * w + cx);
            for (Index c = 0; c < ch; ++c) m[c] = std::max(m[c], p[c]);
          }
          for (Index c = 0; c < ch; ++c) {
            const double r = center[c] / m[c];
            sum[c] += cfg.f == ScalingFn::identity ? r : std::log(r);
          }
        }
        for (Index c = 0; c < ch; ++c) acc(x, y, c) = sum[c];
      }
    }
  });
  return mean_lightness(std::move(acc), cfg.f, cfg.num_paths);
}

ImageF spray_max(const ImageF& input, const SprayConfig& cfg, int spray_index) {
  check_spray(cfg);
  const ImageF img = clamp_floor(input, cfg.eps);
  const Interleaved px(img);
  ImageF out(img.width(), img.height(), img.channels());
  for_each_spray_max(px, cfg, spray_radius(cfg, img), spray_index, [&](Index x, Index y, const auto& m) {
    for (Index c = 0; c < px.ch; ++c) out(x, y, c) = m[c];
  });
  return out;
}

double spray_ratio(const ImageF& floored, Index x, Index y, Index c, const SprayConfig& cfg, int spray_index) {
  check_spray(cfg);
  const SprayDrawer drawer{floored.width(), floored.height(), spray_radius(cfg, floored)};
  const std::uint64_t key = spray_key(cfg.seed, y * floored.width() + x, spray_index);
  const Plane& p = floored.plane(c);
  double m = p(y, x);
  for (int s = 0; s < cfg.samples; ++s) m = std::max(m, p.data()[drawer.draw(key, s, x, y)]);
  return p(y, x) / m;
}

ImageF rsr(const ImageF& input, const SprayConfig& cfg) {
  check_spray(cfg);
  const ImageF img = clamp_floor(input, cfg.eps);
  const Interleaved px(img);
  const double radius = spray_radius(cfg, img);
  ImageF acc(img.width(), img.height(), img.channels(), 0.0);
  for (int k = 0; k < cfg.sprays; ++k) {
    for_each_spray_max(px, cfg, radius, k, [&](Index x, Index y, const auto& m) {
      const double* center = px.at(y * px.w + x);
      for (Index c = 0; c < px.ch; ++c) acc(x, y, c) += center[c] / m[c];
    });
  }
  return mean_lightness(std::move(acc), ScalingFn::identity, cfg.sprays);
}

ImageF lrsr(const ImageF& input, const SprayConfig& cfg, int k1, int k2) {
  if (k1 < 1 || k2 < 1 || k1 % 2 == 0 || k2 % 2 == 0) throw std::invalid_argument("lrsr: kernel sizes must be odd and positive");
  SprayConfig one = cfg;
  one.sprays = 1;
  const ImageF img = clamp_floor(input, cfg.eps);
  const ImageF local_white = spray_max(img, one, 0);
  std::vector<Plane> out;
  for (Index c = 0; c < img.channels(); ++c) {
    const Plane& intensity = img.plane(c);
    const Plane ratio = intensity / local_white.plane(c);
    const Plane smooth_ratio = box_mean<double>(ratio, (k2 - 1) / 2);
    const Plane smooth_intensity = box_mean<double>(intensity, (k1 - 1) / 2);
    out.push_back((smooth_ratio * (intensity / smooth_intensity)).max(0.0).min(1.0));
  }
  return ImageF(std::move(out));
}

ImageF kbr(const ImageF& input, const KernelRetinexConfig& cfg) {
  if (!(cfg.omega_sigma > 0)) throw std::invalid_argument("kbr: omega_sigma must be positive");
  if (cfg.window < 0) throw std::invalid_argument("kbr: window must be non-negative");
  const Index radius = cfg.window > 0 ? cfg.window : static_cast<Index>(std::ceil(3.0 * cfg.omega_sigma));
  const ImageF img = clamp_floor(input, cfg.eps);
  const Index w = img.width(), h = img.height();
  const Index side = 2 * radius + 1;
  std::vector<double> weight(static_cast<std::size_t>(side * side));
  for (Index dy = -radius; dy <= radius; ++dy)
    for (Index dx = -radius; dx <= radius; ++dx)
      weight[static_cast<std::size_t>((dy + radius) * side + dx + radius)] =
          std::exp(-0.5 * static_cast<double>(dx * dx + dy * dy) / (cfg.omega_sigma * cfg.omega_sigma));

  return map_planes(img, [&](const Plane& p) {
    Plane out(h, w);
    parallel_for(h, [&](Index y0, Index y1) {
      for (Index y = y0; y < y1; ++y) {
        const Index ya = std::max<Index>(0, y - radius), yb = std::min(h - 1, y + radius);
        for (Index x = 0; x < w; ++x) {
          const Index xa = std::max<Index>(0, x - radius), xb = std::min(w - 1, x + radius);
          const double center = p(y, x);
          double total = 0, acc = 0;
          for (Index yy = ya; yy <= yb; ++yy) {
            const double* wrow = weight.data() + (yy - y + radius) * side + radius;
            const double* row = &p(yy, 0);
            for (Index xx = xa; xx <= xb; ++xx) {
              const double wt = wrow[xx - x];
              // Brighter neighbours contribute f(I(x)/I(y)); darker ones contribute f(1).
              const double r = row[xx] > center ? center / row[xx] : 1.0;
              total += wt;
              acc += wt * (cfg.f == ScalingFn::identity ? r : std::log(r));
            }
          }
          out(y, x) = cfg.f == ScalingFn::identity ? acc / total : std::exp(acc / total);
        }
      }
    });
    return out;
  });
}

ImageF ssr_log(const ImageF& input, double sigma, EpsilonPolicy eps) {
  const ImageF img = clamp_floor(input, eps);
  return map_planes(img, [&](const Plane& p) { return Plane(p.log() - gaussian_blur<double>(p, sigma).log()); });
}

ImageF msr_log(const ImageF& input, const ScaleBank& bank, EpsilonPolicy eps) {
  const ImageF img = clamp_floor(input, eps);
  ImageF acc(img.width(), img.height(), img.channels(), 0.0);
  for (const auto& s : bank.scales()) {
    const ImageF raw = ssr_log(img, s.sigma, eps);
    for (Index c = 0; c < img.channels(); ++c) acc.plane(c) += s.weight * raw.plane(c);
  }
  return acc;
}

ImageF homomorphic_raw(const ImageF& input, double sigma, EpsilonPolicy eps) {
  const ImageF img = clamp_floor(input, eps);
  return map_planes(img, [&](const Plane& p) {
    const Plane logp = p.log();
    return Plane((logp - gaussian_blur<double>(logp, sigma)).exp());
  });
}

ImageF rescale_surround_output(const ImageF& raw, double p_low, double p_high) {
  if (rescale_is_degenerate(raw, p_low, p_high)) return ImageF(raw.width(), raw.height(), raw.channels(), 1.0);
  return percentile_rescale(raw, p_low, p_high);
}

ImageF ssr(const ImageF& img, double sigma, EpsilonPolicy eps) { return rescale_surround_output(ssr_log(img, sigma, eps)); }

ImageF msr(const ImageF& img, const ScaleBank& bank, EpsilonPolicy eps) {
  return rescale_surround_output(msr_log(img, bank, eps));
}

ImageF homomorphic(const ImageF& img, double sigma, EpsilonPolicy eps) {
  return rescale_surround_output(homomorphic_raw(img, sigma, eps));
}

}  // namespace rdh
