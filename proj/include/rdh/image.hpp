#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rdh {

using Eigen::Index;

/// Planar raster: one row-major Eigen array per channel, rows = height.
///
/// Pixel values are expected to lie in [0,1]; every public operation in the
/// library returns images in that range unless it documents otherwise (raw
/// log-domain Retinex maps, for example).
template <typename Scalar>
class Image {
 public:
  using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Image() = default;

  Image(Index width, Index height, Index channels, Scalar fill = Scalar(0)) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("Image: empty dimensions");
    if (channels != 1 && channels != 3) throw std::invalid_argument("Image: channels must be 1 or 3");
    planes_.assign(static_cast<std::size_t>(channels), Plane::Constant(height, width, fill));
  }

  explicit Image(std::vector<Plane> planes) : planes_(std::move(planes)) {
    if (planes_.size() != 1 && planes_.size() != 3)
      throw std::invalid_argument("Image: channels must be 1 or 3");
    for (const auto& p : planes_) {
      if (p.rows() != planes_[0].rows() || p.cols() != planes_[0].cols() || p.size() == 0)
        throw std::invalid_argument("Image: inconsistent plane shapes");
    }
  }

  static Image from_plane(Plane p) { return Image(std::vector<Plane>{std::move(p)}); }

  Index width() const { return planes_.empty() ? 0 : planes_[0].cols(); }
  Index height() const { return planes_.empty() ? 0 : planes_[0].rows(); }
  Index channels() const { return static_cast<Index>(planes_.size()); }
  Index pixels() const { return width() * height(); }
  Index size() const { return pixels() * channels(); }
  bool empty() const { return planes_.empty(); }

  Plane& plane(Index c) { return planes_[static_cast<std::size_t>(c)]; }
  const Plane& plane(Index c) const { return planes_[static_cast<std::size_t>(c)]; }
  std::vector<Plane>& planes() { return planes_; }
  const std::vector<Plane>& planes() const { return planes_; }

  Scalar& operator()(Index x, Index y, Index c = 0) { return plane(c)(y, x); }
  Scalar operator()(Index x, Index y, Index c = 0) const { return plane(c)(y, x); }

  bool same_shape(const Image& o) const {
    return width() == o.width() && height() == o.height() && channels() == o.channels();
  }
  bool same_extent(const Image& o) const { return width() == o.width() && height() == o.height(); }

  Scalar min_value() const {
    Scalar m = planes_.at(0).minCoeff();
    for (const auto& p : planes_) m = std::min(m, p.minCoeff());
    return m;
  }
  Scalar max_value() const {
    Scalar m = planes_.at(0).maxCoeff();
    for (const auto& p : planes_) m = std::max(m, p.maxCoeff());
    return m;
  }
  bool all_finite() const {
    return std::all_of(planes_.begin(), planes_.end(), [](const Plane& p) { return p.isFinite().all(); });
  }

  template <typename Other>
  Image<Other> cast() const {
    std::vector<typename Image<Other>::Plane> out;
    out.reserve(planes_.size());
    for (const auto& p : planes_) out.push_back(p.template cast<Other>());
    return Image<Other>(std::move(out));
  }

  friend bool operator==(const Image& a, const Image& b) {
    if (!a.same_shape(b)) return false;
    for (Index c = 0; c < a.channels(); ++c)
      if (!(a.plane(c) == b.plane(c)).all()) return false;
    return true;
  }

 private:
  std::vector<Plane> planes_;
};

using ImageF = Image<double>;
using Plane = ImageF::Plane;

/// Applies `fn(const Plane&) -> Plane` to every channel.
template <typename Scalar, typename Fn>
Image<Scalar> map_planes(const Image<Scalar>& img, Fn&& fn) {
  std::vector<typename Image<Scalar>::Plane> out;
  out.reserve(static_cast<std::size_t>(img.channels()));
  for (const auto& p : img.planes()) out.push_back(fn(p));
  return Image<Scalar>(std::move(out));
}

/// Applies `fn(const Plane&, const Plane&) -> Plane` channel by channel.
template <typename Scalar, typename Fn>
Image<Scalar> zip_planes(const Image<Scalar>& a, const Image<Scalar>& b, Fn&& fn) {
  if (!a.same_shape(b)) throw std::invalid_argument("zip_planes: shape mismatch");
  std::vector<typename Image<Scalar>::Plane> out;
  out.reserve(static_cast<std::size_t>(a.channels()));
  for (Index c = 0; c < a.channels(); ++c) out.push_back(fn(a.plane(c), b.plane(c)));
  return Image<Scalar>(std::move(out));
}

template <typename Scalar>
Image<Scalar> clip_unit(const Image<Scalar>& img) {
  return map_planes(img, [](const auto& p) {
    return typename Image<Scalar>::Plane(p.max(Scalar(0)).min(Scalar(1)));
  });
}

/// Luma with Rec.601 weights; single-channel images are returned as-is.
template <typename Scalar>
typename Image<Scalar>::Plane luma(const Image<Scalar>& img) {
  if (img.channels() == 1) return img.plane(0);
  return Scalar(0.299) * img.plane(0) + Scalar(0.587) * img.plane(1) + Scalar(0.114) * img.plane(2);
}

}  // namespace rdh
