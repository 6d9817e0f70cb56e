#include "rdh/dehaze.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "rdh/filters.hpp"
#include "rdh/parallel.hpp"

namespace rdh {

AtmosphericLight::AtmosphericLight(double r, double g, double b) : rgb_{r, g, b} {
  for (double v : rgb_)
    if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument("AtmosphericLight: components must lie in (0,1]");
}

TransmissionMap::TransmissionMap(Plane values) : t_(std::move(values)) {
  if (t_.size() == 0) throw std::invalid_argument("TransmissionMap: empty");
  if (!t_.isFinite().all() || t_.minCoeff() < 0.0 || t_.maxCoeff() > 1.0)
    throw std::invalid_argument("TransmissionMap: values must be finite and within [0,1]");
}

TransmissionMap TransmissionMap::constant(Index width, Index height, double t) {
  return TransmissionMap(Plane::Constant(height, width, t));
}

TransmissionMap TransmissionMap::clamped(double t_min) const { return TransmissionMap(t_.max(t_min).min(1.0)); }

ImageF dark_channel(const ImageF& img, PatchSpec patch) {
  Plane channel_min = img.plane(0);
  for (Index c = 1; c < img.channels(); ++c) channel_min = channel_min.min(img.plane(c));
  // min commutes, so filtering the channel minimum once is exact.
  return ImageF::from_plane(min_filter<double>(channel_min, patch.radius));
}

AtmosphericLight estimate_airlight(const ImageF& img, PatchSpec patch, double top_fraction, EpsilonPolicy eps) {
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) throw std::invalid_argument("estimate_airlight: top_fraction must lie in (0,1]");
  const Plane dark = dark_channel(img, patch).plane(0);
  const Index n = dark.size();
  const Index keep = std::clamp<Index>(static_cast<Index>(std::floor(top_fraction * static_cast<double>(n))), 1, n);

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  auto brighter_dark = [&](Index a, Index b) {
    const double da = dark.data()[a], db = dark.data()[b];
    return da != db ? da > db : a < b;
  };
  std::nth_element(order.begin(), order.begin() + (keep - 1), order.end(), brighter_dark);

  auto channel_sum = [&](Index i) {
    double s = 0;
    for (Index c = 0; c < img.channels(); ++c) s += img.plane(c).data()[i];
    return s;
  };
  Index best = -1;
  double best_sum = -1;
  for (Index k = 0; k < keep; ++k) {
    const Index i = order[static_cast<std::size_t>(k)];
    const double s = channel_sum(i);
    if (s > best_sum || (s == best_sum && i < best)) {
      best = i;
      best_sum = s;
    }
  }
  auto component = [&](Index c) {
    return std::clamp(img.plane(img.channels() == 1 ? 0 : c).data()[best], eps.floor(), 1.0);
  };
  return {component(0), component(1), component(2)};
}

TransmissionMap estimate_transmission(const ImageF& img, const AtmosphericLight& airlight, PatchSpec patch,
                                      double retain, double t_min) {
  if (!(retain > 0.0 && retain <= 1.0)) throw std::invalid_argument("estimate_transmission: retain must lie in (0,1]");
  if (!(t_min >= 0.0 && t_min < 1.0)) throw std::invalid_argument("estimate_transmission: t_min must lie in [0,1)");
  const ImageF normalized = map_planes(img, [&, c = Index{0}](const Plane& p) mutable {
    return Plane(p / airlight.for_channel(c++, img.channels()));
  });
  const Plane dark = dark_channel(normalized, patch).plane(0);
  return TransmissionMap((1.0 - retain * dark).max(t_min).min(1.0));
}

Plane guided_filter(const ImageF& guide, const Plane& src, Index radius, double reg) {
  if (guide.width() != src.cols() || guide.height() != src.rows())
    throw std::invalid_argument("guided_filter: guide and source dimensions differ");
  if (!(reg > 0)) throw std::invalid_argument("guided_filter: reg must be positive");
  auto mean = [radius](const Plane& p) { return box_mean<double>(p, radius); };
  const Plane mean_p = mean(src);

  if (guide.channels() == 1) {
    const Plane& g = guide.plane(0);
    const Plane mean_g = mean(g);
    const Plane var_g = mean(g * g) - mean_g * mean_g;
    const Plane cov_gp = mean(g * src) - mean_g * mean_p;
    const Plane a = cov_gp / (var_g + reg);
    const Plane b = mean_p - a * mean_g;
    return mean(a) * g + mean(b);
  }

  std::array<Plane, 3> mean_g, cov_gp;
  for (Index c = 0; c < 3; ++c) {
    mean_g[c] = mean(guide.plane(c));
    cov_gp[c] = mean(guide.plane(c) * src) - mean_g[c] * mean_p;
  }
  std::array<std::array<Plane, 3>, 3> cov;
  for (Index i = 0; i < 3; ++i)
    for (Index j = i; j < 3; ++j) cov[i][j] = mean(guide.plane(i) * guide.plane(j)) - mean_g[i] * mean_g[j];

  const Index h = src.rows(), w = src.cols();
  std::array<Plane, 3> a{Plane(h, w), Plane(h, w), Plane(h, w)};
  Plane b(h, w);
  parallel_for(h, [&](Index y0, Index y1) {
    for (Index y = y0; y < y1; ++y) {
      for (Index x = 0; x < w; ++x) {
        Eigen::Matrix3d sigma;
        Eigen::Vector3d rhs, mu;
        for (Index i = 0; i < 3; ++i) {
          for (Index j = i; j < 3; ++j) sigma(i, j) = sigma(j, i) = cov[i][j](y, x);
          sigma(i, i) += reg;
          rhs(i) = cov_gp[i](y, x);
          mu(i) = mean_g[i](y, x);
        }
        const Eigen::Vector3d coeff = sigma.ldlt().solve(rhs);
        for (Index i = 0; i < 3; ++i) a[i](y, x) = coeff(i);
        b(y, x) = mean_p(y, x) - coeff.dot(mu);
      }
    }
  });
  Plane q = mean(b);
  for (Index c = 0; c < 3; ++c) q += mean(a[c]) * guide.plane(c);
  return q;
}

TransmissionMap refine_transmission(const TransmissionMap& t, const ImageF& guide, Index radius, double reg,
                                    double t_min) {
  return TransmissionMap(guided_filter(guide, t.values(), radius, reg).max(t_min).min(1.0));
}

ImageF invert_haze_model(const ImageF& img, const TransmissionMap& t, const AtmosphericLight& airlight, double t_min) {
  if (img.width() != t.width() || img.height() != t.height())
    throw std::invalid_argument("invert_haze_model: transmission size mismatch");
  const Plane denom = t.values().max(t_min);
  std::vector<Plane> out;
  for (Index c = 0; c < img.channels(); ++c) {
    const double a = airlight.for_channel(c, img.channels());
    out.push_back(((img.plane(c) - a) / denom + a).max(0.0).min(1.0));
  }
  return ImageF(std::move(out));
}

ImageF koschmieder_forward(const ImageF& scene, const TransmissionMap& t, const AtmosphericLight& airlight) {
  if (scene.width() != t.width() || scene.height() != t.height())
    throw std::invalid_argument("koschmieder_forward: transmission size mismatch");
  const Plane& tv = t.values();
  std::vector<Plane> out;
  for (Index c = 0; c < scene.channels(); ++c) {
    const double a = airlight.for_channel(c, scene.channels());
    out.push_back(tv * scene.plane(c) + (1.0 - tv) * a);
  }
  return ImageF(std::move(out));
}

DcpResult dcp_dehaze_detailed(const ImageF& img, const DcpConfig& cfg) {
  const AtmosphericLight airlight =
      cfg.airlight ? *cfg.airlight : estimate_airlight(img, cfg.patch, cfg.top_fraction, cfg.eps);
  TransmissionMap t = estimate_transmission(img, airlight, cfg.patch, cfg.retain, cfg.t_min);
  if (cfg.refine) t = refine_transmission(t, img, cfg.guide_radius, cfg.guide_reg, cfg.t_min);
  ImageF scene = invert_haze_model(img, t, airlight, cfg.t_min);
  return {std::move(scene), std::move(t), airlight};
}

ImageF dcp_dehaze(const ImageF& img, const DcpConfig& cfg) { return dcp_dehaze_detailed(img, cfg).scene; }

}  // namespace rdh
