#ifndef BLURSEG_SYNTH_HPP
#define BLURSEG_SYNTH_HPP

#include "blurseg/image.hpp"
#include "blurseg/kernel.hpp"
#include "blurseg/manifest.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace blurseg {

struct MotionSpec {
  double length = 1.0;          // pixels of motion extent
  double angle = 0.0;           // radians
  uint64_t trajectory_seed = 0; // 0 = straight line
  double noise_sigma = 0.0;
};

using RegionMask = Eigen::ArrayXXi;  // per-pixel index into a kernel list

/// Anti-aliased line segment of the given length/angle through the kernel
/// center, rasterized by supersampling and normalized to sum 1.
Kernel linear_motion_kernel(const MotionSpec& spec, int size);

/// Kernel traced by a seeded random walk confined to the motion extent.
/// Deterministic given the seed.
Kernel random_trajectory_kernel(const MotionSpec& spec, int size);

/// Periodic convolution of each channel with k, plus seeded Gaussian noise,
/// clamped to [0,1].
Image apply_uniform_blur(const Image& x, const Kernel& k, double noise_sigma,
                         uint64_t noise_seed = 0);

/// Per-region uniform blurs composited through the mask; seams blended
/// linearly over the feather width.
Image apply_nonuniform_blur(const Image& x, const BasisKernelSet& kernels,
                            const RegionMask& mask, int feather,
                            double noise_sigma, uint64_t noise_seed = 0);

struct SynthConfig {
  std::string output_dir;
  int count = 4;
  int height = 64;
  int width = 64;
  int channels = 1;
  uint64_t seed = 1;
  double noise_sigma = 0.0;
  int feather = 0;
  std::string mode = "uniform";  // "uniform" | "two_region"
  std::vector<MotionSpec> kernels;
  int kernel_size = 0;  // 0 = smallest odd side covering the longest motion
  std::string sharp_dir;  // optional source images; procedural when empty
  std::string image_format = "pfm";  // "pfm" | "png16"
};

SynthConfig synth_config_from_json(const nlohmann::json& j);
nlohmann::json synth_config_to_json(const SynthConfig& cfg);

/// Seeded procedural sharp image: piecewise-constant shapes plus fine
/// texture, so every region carries high-frequency content.
Image procedural_sharp_image(uint64_t seed, int height, int width, int channels);

/// Emits blur/sharp pairs, masks, kernel files and the manifest under
/// cfg.output_dir. Fully deterministic given cfg.seed.
DatasetManifest make_dataset(const SynthConfig& cfg);

}  // namespace blurseg

#endif  // BLURSEG_SYNTH_HPP
