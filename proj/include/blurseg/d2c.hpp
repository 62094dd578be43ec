#ifndef BLURSEG_D2C_HPP
#define BLURSEG_D2C_HPP

#include "blurseg/discretize.hpp"
#include "blurseg/image.hpp"
#include "blurseg/manifest.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace blurseg {

/// Per-class, per-channel linear patch filters mapping a PxP blur patch to
/// the center residual sample. Empty classes carry the zero filter.
struct FilterBank {
  int patch_side = 7;
  int class_count = 0;
  int channels = 0;
  double ridge = 1e-3;
  // [class][channel]: P*P taps (row-major over the patch) then bias
  std::vector<std::vector<Eigen::VectorXd>> weights;
  std::vector<std::vector<double>> bias;
};

/// Normal-equation accumulators for one regression family fit. The design
/// row of a pixel is its PxP periodic blur patch plus a constant 1.
struct DesignAccumulator {
  int patch_side = 7;
  int class_count = 0;
  int channels = 0;
  // [class][channel]
  std::vector<std::vector<Eigen::MatrixXd>> xtx;
  std::vector<std::vector<Eigen::VectorXd>> xty;
  std::vector<long> counts;  // pixels per class

  DesignAccumulator() = default;
  DesignAccumulator(int patch_side, int class_count, int channels);
  void merge(const DesignAccumulator& other);
};

/// Accumulate every pixel of (blur, sharp) into the normal equations of its
/// class: patch from blur (periodic boundary), target x_i - y_i.
void collect_design(const Image& blur, const Image& sharp,
                    const BlurSegmentationMap& rho, DesignAccumulator* acc);

DesignAccumulator collect_design(const DatasetManifest& dataset,
                                 const std::vector<BlurSegmentationMap>& maps,
                                 int class_count, int patch_side);

/// Solves (G'G + ridge*I) w = G'e per class and channel via LDLT.
/// With ridge = 0 a numerically singular system raises std::runtime_error.
FilterBank fit_class_filters(const DesignAccumulator& acc, double ridge);

/// Residual estimate: each pixel's class filter applied to its local blur
/// patch. Throws when rho references a class the bank does not cover.
Image predict_residual(const Image& y, const BlurSegmentationMap& rho,
                       const FilterBank& fb);

/// x_hat = clamp(y + e_hat, 0, 1).
Image reconstruct(const Image& y, const Image& residual);

void save_filter_bank(const FilterBank& fb, const std::string& path);
FilterBank load_filter_bank(const std::string& path);

}  // namespace blurseg

#endif  // BLURSEG_D2C_HPP
