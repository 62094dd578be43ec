#ifndef BLURSEG_IMAGE_HPP
#define BLURSEG_IMAGE_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace blurseg {

using Plane = Eigen::ArrayXXf;   // (rows, cols), one channel
using PlaneD = Eigen::ArrayXXd;  // double precision, spectral/regression paths

/// Planar floating-point raster, samples nominally in [0,1].
/// Immutable by convention once constructed; all free functions are pure.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels)
      : planes_(static_cast<size_t>(channels), Plane::Zero(height, width)) {}

  explicit Image(Plane plane) { planes_.push_back(std::move(plane)); }

  int height() const { return planes_.empty() ? 0 : static_cast<int>(planes_[0].rows()); }
  int width() const { return planes_.empty() ? 0 : static_cast<int>(planes_[0].cols()); }
  int channels() const { return static_cast<int>(planes_.size()); }

  const Plane& plane(int c) const { return planes_[static_cast<size_t>(c)]; }
  Plane& plane(int c) { return planes_[static_cast<size_t>(c)]; }

  bool same_shape(const Image& other) const {
    return height() == other.height() && width() == other.width() &&
           channels() == other.channels();
  }

 private:
  std::vector<Plane> planes_;
};

/// Rec.601 luma projection; identity for single-channel images.
Plane luma(const Image& img);

/// Signed residual e = x - y, no clamping. Throws std::invalid_argument on
/// shape mismatch.
Image residual_error(const Image& x, const Image& y);

Image clamp01(Image img);

// PNG (8/16-bit gray or RGB) and PFM (binary float, gray or RGB).
// PNG samples normalize to [0,1]; PFM round trips bit-exactly.
Image load_image(const std::string& path);
void save_image(const Image& img, const std::string& path);
void save_png16(const Image& img, const std::string& path);

}  // namespace blurseg

#endif  // BLURSEG_IMAGE_HPP
