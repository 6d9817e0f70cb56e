#pragma once

// Retinex / dehazing duality. With white airlight, dehazing an image I is
// equivalent to running Retinex on its negative and negating the result:
//
//   DehRet(I) = 1 - Retinex(1 - I)        (dehazing from any Retinex)
//   RetDeh(I) = 1 - Dehazing(1 - I)       (illumination removal from any dehazer)
//
// Backends are injected as Enhancer handles so every method in `retinex` or
// `dehaze` can be used on either side without modification.

#include <functional>
#include <string>
#include <utility>

#include "rdh/dehaze.hpp"
#include "rdh/image.hpp"

namespace rdh {

/// Named handle to a deterministic ImageF -> ImageF operation.
class Enhancer {
 public:
  using Fn = std::function<ImageF(const ImageF&)>;

  Enhancer(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  static Enhancer identity() {
    return {"identity", [](const ImageF& img) { return img; }};
  }

  ImageF operator()(const ImageF& img) const { return fn_(img); }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  Fn fn_;
};

/// 1 - retinex(1 - img) before clipping.
ImageF dehret_unclipped(const ImageF& img, const Enhancer& retinex);

/// 1 - retinex(1 - img), clipped to [0,1].
ImageF dehret(const ImageF& img, const Enhancer& retinex);

/// 1 - dehazer(1 - img), clipped to [0,1].
ImageF retdeh(const ImageF& img, const Enhancer& dehazer);

/// The conjugate backend X -> 1 - e(1 - X). Turns a Retinex method into a
/// dehazer and a dehazer into an illumination remover.
Enhancer conjugate(const Enhancer& e);

/// Sliding-window maximum of a single-channel image. For a monochrome image
/// this is exactly the dark-channel transmission of its negative.
ImageF max_filter(const ImageF& img, PatchSpec patch = {});

}  // namespace rdh
