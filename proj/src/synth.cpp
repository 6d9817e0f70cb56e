#include "rdh/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rdh/random.hpp"

namespace rdh {
namespace {

constexpr double kMinTransmission = 1e-4;

double lattice_value(std::uint64_t seed, Index i, Index j) {
  return 2.0 * unit_closed_open(counter_hash(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j))) - 1.0;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// Value noise in [-1, 1] on a lattice of spacing `scale`.
Plane value_noise(Index width, Index height, double scale, std::uint64_t seed) {
  Plane out(height, width);
  for (Index y = 0; y < height; ++y) {
    const double fy = static_cast<double>(y) / scale;
    const auto j = static_cast<Index>(std::floor(fy));
    const double ty = smoothstep(fy - static_cast<double>(j));
    for (Index x = 0; x < width; ++x) {
      const double fx = static_cast<double>(x) / scale;
      const auto i = static_cast<Index>(std::floor(fx));
      const double tx = smoothstep(fx - static_cast<double>(i));
      const double top = lattice_value(seed, i, j) * (1 - tx) + lattice_value(seed, i + 1, j) * tx;
      const double bottom = lattice_value(seed, i, j + 1) * (1 - tx) + lattice_value(seed, i + 1, j + 1) * tx;
      out(y, x) = top * (1 - ty) + bottom * ty;
    }
  }
  return out;
}

}  // namespace

DepthField::DepthField(Plane depth) : d_(std::move(depth)) {
  if (d_.size() == 0) throw std::invalid_argument("DepthField: empty");
  if (!d_.isFinite().all() || d_.minCoeff() < 0.0) throw std::invalid_argument("DepthField: values must be finite and >= 0");
}

TransmissionMap depth_to_transmission(const DepthField& depth, double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("depth_to_transmission: beta must be >= 0");
  return TransmissionMap((-beta * depth.values()).exp());
}

Plane perturbation_field(Index width, Index height, double amp, double scale, std::uint64_t seed) {
  if (!(amp >= 0.0 && amp <= 0.5)) throw std::invalid_argument("perturbation_field: amplitude must lie in [0, 0.5]");
  if (!(scale > 0.0)) throw std::invalid_argument("perturbation_field: scale must be positive");
  if (amp == 0.0) return Plane::Ones(height, width);
  Plane noise = value_noise(width, height, scale, seed);
  noise -= noise.mean();
  return 1.0 + amp * noise;
}

FoggyImage synth_fog(const ImageF& scene, const DepthField& depth, const FogSpec& spec) {
  if (scene.width() != depth.width() || scene.height() != depth.height())
    throw std::invalid_argument("synth_fog: depth and scene dimensions differ");
  const Plane base = depth_to_transmission(depth, spec.beta).values();
  const Plane field = perturbation_field(scene.width(), scene.height(), spec.perturb_amp, spec.perturb_scale, spec.seed);
  TransmissionMap t((base * field).max(kMinTransmission).min(1.0));
  ImageF hazy = koschmieder_forward(scene, t, spec.airlight);
  return {std::move(hazy), std::move(t)};
}

DepthField depth_preset(std::string_view name, Index width, Index height, int levels) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("depth_preset: empty dimensions");
  Plane d(height, width);
  const double last_row = static_cast<double>(std::max<Index>(1, height - 1));
  if (name == "ramp") {
    for (Index y = 0; y < height; ++y) d.row(y).setConstant(static_cast<double>(height - 1 - y) / last_row);
  } else if (name == "corridor") {
    const double cx = 0.5 * static_cast<double>(width - 1), cy = 0.5 * static_cast<double>(height - 1);
    const double hx = std::max(0.5, cx), hy = std::max(0.5, cy);
    for (Index y = 0; y < height; ++y)
      for (Index x = 0; x < width; ++x) {
        const double cheb = std::max(std::abs(static_cast<double>(x) - cx) / hx, std::abs(static_cast<double>(y) - cy) / hy);
        d(y, x) = std::max(0.0, 1.0 - cheb);
      }
  } else if (name == "steps") {
    if (levels < 2) throw std::invalid_argument("depth_preset: steps needs at least 2 levels");
    for (Index y = 0; y < height; ++y) {
      const Index band = std::min<Index>(levels - 1, (height - 1 - y) * levels / height);
      d.row(y).setConstant(static_cast<double>(band) / (levels - 1));
    }
  } else {
    throw std::invalid_argument("unknown depth preset '" + std::string(name) + "'");
  }
  return DepthField(std::move(d));
}

ImageF procedural_scene(Index width, Index height, std::uint64_t seed) {
  CounterStream rng(seed, 0x5ce7e);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit_closed_open(rng.next()); };

  // Jittered-grid Voronoi tiles, each with a saturated colour.
  const Index cell = std::max<Index>(8, std::min(width, height) / 5);
  const Index gx = (width + cell - 1) / cell, gy = (height + cell - 1) / cell;
  struct Site {
    double x, y;
    std::array<double, 3> rgb;
  };
  std::vector<Site> sites;
  for (Index j = 0; j < gy; ++j)
    for (Index i = 0; i < gx; ++i) {
      Site s{(static_cast<double>(i) + uniform(0.1, 0.9)) * cell, (static_cast<double>(j) + uniform(0.1, 0.9)) * cell, {}};
      const double hi = uniform(0.45, 0.95), lo = uniform(0.0, 0.08), mid = uniform(lo, hi);
      std::array<double, 3> levels{hi, mid, lo};
      const auto rot = static_cast<std::size_t>(rng.next() % 3);
      const bool swap = rng.next() & 1;
      for (std::size_t c = 0; c < 3; ++c) s.rgb[c] = levels[(c + rot) % 3];
      if (swap) std::swap(s.rgb[0], s.rgb[1]);
      sites.push_back(s);
    }

  const Plane texture = value_noise(width, height, 3.0, seed ^ 0x7e47u);
  const Plane grain = value_noise(width, height, 11.0, seed ^ 0x9a1du);

  struct Shadow {
    double x, y, r;
  };
  std::vector<Shadow> shadows;
  for (int k = 0; k < 3; ++k)
    shadows.push_back({uniform(0, static_cast<double>(width)), uniform(0, static_cast<double>(height)),
                       uniform(0.08, 0.2) * static_cast<double>(std::min(width, height))});

  ImageF img(width, height, 3);
  for (Index y = 0; y < height; ++y)
    for (Index x = 0; x < width; ++x) {
      const Site* best = &sites[0];
      double best_d = 1e300;
      for (const auto& s : sites) {
        const double d = (s.x - x) * (s.x - x) + (s.y - y) * (s.y - y);
        if (d < best_d) {
          best_d = d;
          best = &s;
        }
      }
      double shade = (0.8 + 0.2 * texture(y, x)) * (0.9 + 0.1 * grain(y, x));
      for (const auto& sh : shadows)
        if ((sh.x - x) * (sh.x - x) + (sh.y - y) * (sh.y - y) < sh.r * sh.r) shade *= 0.45;
      for (Index c = 0; c < 3; ++c) img(x, y, c) = std::clamp(best->rgb[static_cast<std::size_t>(c)] * shade, 0.0, 1.0);
    }
  return img;
}

}  // namespace rdh
