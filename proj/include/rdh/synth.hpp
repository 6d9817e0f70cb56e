#pragma once

// Synthetic fog for full-reference evaluation: a depth field is turned into
// a transmission map, perturbed by smooth multiplicative value noise, and
// pushed through the Koschmieder model.

#include <cstdint>
#include <string_view>

#include "rdh/dehaze.hpp"
#include "rdh/image.hpp"

namespace rdh {

/// Relative scene depth, finite and non-negative.
class DepthField {
 public:
  explicit DepthField(Plane depth);
  const Plane& values() const { return d_; }
  Index width() const { return d_.cols(); }
  Index height() const { return d_.rows(); }

 private:
  Plane d_;
};

struct FogSpec {
  double beta = 1.0;  ///< extinction coefficient
  AtmosphericLight airlight = AtmosphericLight::white();
  double perturb_amp = 0.0;     ///< in [0, 0.5]
  double perturb_scale = 32.0;  ///< correlation length in pixels
  std::uint64_t seed = 0;
};

struct FoggyImage {
  ImageF hazy;
  TransmissionMap transmission;  ///< ground truth used to build `hazy`
};

/// t = exp(-beta d), unclamped.
TransmissionMap depth_to_transmission(const DepthField& depth, double beta);

/// Smooth multiplicative field with mean exactly 1: value noise on a lattice
/// of spacing `scale`, smoothstep-interpolated, centred and scaled by `amp`.
Plane perturbation_field(Index width, Index height, double amp, double scale, std::uint64_t seed);

FoggyImage synth_fog(const ImageF& scene, const DepthField& depth, const FogSpec& spec);

/// Deterministic fixtures: "ramp" (0 on the bottom row, 1 on the top),
/// "corridor" (1 at the centre vanishing point, falling to 0 at the frame),
/// "steps" (`levels` horizontal bands, 0 at the bottom).
DepthField depth_preset(std::string_view name, Index width, Index height, int levels = 4);

/// Haze-free RGB test scene: saturated colour tiles with texture and cast
/// shadows, so most patches contain a near-zero channel.
ImageF procedural_scene(Index width, Index height, std::uint64_t seed);

}  // namespace rdh
