#include "rdh/duality.hpp"

#include <stdexcept>

#include "rdh/core.hpp"
#include "rdh/filters.hpp"

namespace rdh {

ImageF dehret_unclipped(const ImageF& img, const Enhancer& retinex) {
  ImageF out = retinex(invert(img));
  if (!out.same_shape(img)) throw std::runtime_error("dehret: backend '" + retinex.name() + "' changed the image shape");
  return invert(out);
}

ImageF dehret(const ImageF& img, const Enhancer& retinex) { return clip_unit(dehret_unclipped(img, retinex)); }

ImageF retdeh(const ImageF& img, const Enhancer& dehazer) {
  ImageF out = dehazer(invert(img));
  if (!out.same_shape(img)) throw std::runtime_error("retdeh: backend '" + dehazer.name() + "' changed the image shape");
  return clip_unit(invert(out));
}

Enhancer conjugate(const Enhancer& e) {
  return {"conjugate(" + e.name() + ")", [e](const ImageF& img) { return invert(e(invert(img))); }};
}

ImageF max_filter(const ImageF& img, PatchSpec patch) {
  if (img.channels() != 1) throw std::invalid_argument("max_filter: single-channel image required");
  return ImageF::from_plane(max_filter<double>(img.plane(0), patch.radius));
}

}  // namespace rdh
