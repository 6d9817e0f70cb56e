#pragma once

#include <array>
#include <optional>

#include "rdh/core.hpp"
#include "rdh/image.hpp"

namespace rdh {

inline constexpr double kDefaultTMin = 0.1;

/// Global airlight colour A, each component in (0,1].
class AtmosphericLight {
 public:
  AtmosphericLight(double r, double g, double b);
  static AtmosphericLight white() { return {1.0, 1.0, 1.0}; }
  static AtmosphericLight gray(double v) { return {v, v, v}; }

  double operator[](Index c) const { return rgb_[static_cast<std::size_t>(c)]; }
  /// Component used for channel `c` of an image with `channels` channels;
  /// single-channel images use the first component.
  double for_channel(Index c, Index channels) const { return channels == 1 ? rgb_[0] : (*this)[c]; }
  const std::array<double, 3>& rgb() const { return rgb_; }

 private:
  std::array<double, 3> rgb_;
};

/// Square neighbourhood of side 2r+1.
struct PatchSpec {
  Index radius = 7;
};

/// Medium transmission t(x) in [0,1].
class TransmissionMap {
 public:
  explicit TransmissionMap(Plane values);
  static TransmissionMap constant(Index width, Index height, double t);

  const Plane& values() const { return t_; }
  Index width() const { return t_.cols(); }
  Index height() const { return t_.rows(); }
  double operator()(Index x, Index y) const { return t_(y, x); }

  TransmissionMap clamped(double t_min) const;
  ImageF as_image() const { return ImageF::from_plane(t_); }

 private:
  Plane t_;
};

/// min over channels of the min over the patch; single channel output.
ImageF dark_channel(const ImageF& img, PatchSpec patch = {});

/// Brightest (largest channel sum) input pixel among the `top_fraction`
/// pixels with the highest dark channel. Ties break to the lowest pixel
/// index. Components are floored so an all-black image yields (f, f, f).
AtmosphericLight estimate_airlight(const ImageF& img, PatchSpec patch = {}, double top_fraction = 0.001,
                                   EpsilonPolicy eps = {});

/// t = 1 - retain * min_c min_{y in patch} I^c(y) / A^c, clamped to [t_min, 1].
TransmissionMap estimate_transmission(const ImageF& img, const AtmosphericLight& airlight, PatchSpec patch = {},
                                      double retain = 1.0, double t_min = kDefaultTMin);

/// Guided filter of `src` steered by `guide` (1 or 3 channels): per window
/// least-squares fit src ~ a . guide + b with ridge `reg` on a, then the
/// coefficients are box-averaged. Windows are clipped at the border.
Plane guided_filter(const ImageF& guide, const Plane& src, Index radius, double reg);

/// Guided-filter refinement of t, clamped to [t_min, 1].
TransmissionMap refine_transmission(const TransmissionMap& t, const ImageF& guide, Index radius = 20, double reg = 1e-3,
                                    double t_min = kDefaultTMin);

/// J = (I - A) / max(t, t_min) + A, clipped to [0,1].
ImageF invert_haze_model(const ImageF& img, const TransmissionMap& t, const AtmosphericLight& airlight,
                         double t_min = kDefaultTMin);

/// I = t J + (1 - t) A.
ImageF koschmieder_forward(const ImageF& scene, const TransmissionMap& t, const AtmosphericLight& airlight);

struct DcpConfig {
  PatchSpec patch{};
  double retain = 1.0;
  bool refine = true;
  double top_fraction = 0.001;
  double t_min = kDefaultTMin;
  Index guide_radius = 20;
  double guide_reg = 1e-3;
  std::optional<AtmosphericLight> airlight;  ///< known A; estimated when empty
  EpsilonPolicy eps{};
};

struct DcpResult {
  ImageF scene;
  TransmissionMap transmission;
  AtmosphericLight airlight;
};

DcpResult dcp_dehaze_detailed(const ImageF& img, const DcpConfig& cfg = {});
ImageF dcp_dehaze(const ImageF& img, const DcpConfig& cfg = {});

}  // namespace rdh
