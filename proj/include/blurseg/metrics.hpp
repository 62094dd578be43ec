#ifndef BLURSEG_METRICS_HPP
#define BLURSEG_METRICS_HPP

#include "blurseg/image.hpp"
#include "blurseg/manifest.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace blurseg {

constexpr double kPsnrCap = 100.0;  // returned for zero MSE

/// 10*log10(1/MSE) over all channels jointly, peak 1.0, capped at 100 dB.
double psnr(const Image& a, const Image& b);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;
};

/// Mean local SSIM over windows fully inside the image, Gaussian-weighted,
/// computed per channel and averaged. Requires both sides >= window.
double ssim(const Image& a, const Image& b, const SsimOptions& opt = {});

struct EvalRecord {
  std::string pair_id;
  double psnr_db = 0.0;
  double ssim_score = 0.0;
  std::vector<std::string> tags;          // "total", "large"
  nlohmann::json fingerprint;             // R, lambda, eps, P, seeds
};

/// Ranks pairs by mean |sharp - blur| luma and tags the top fraction as
/// "large". Ties resolve by ascending pair index. Returns one flag per entry.
std::vector<bool> large_motion_subset(const DatasetManifest& manifest,
                                      double fraction);

/// Fixed 32-entry palette for class-map visualization; entry 0 is unused
/// (class indices are 1-based).
const std::array<std::array<uint8_t, 3>, 33>& segmentation_palette();

}  // namespace blurseg

#endif  // BLURSEG_METRICS_HPP
