#ifndef BLURSEG_DISCRETIZE_HPP
#define BLURSEG_DISCRETIZE_HPP

#include "blurseg/image.hpp"
#include "blurseg/kernel.hpp"
#include "blurseg/manifest.hpp"
#include "blurseg/spectral.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace blurseg {

/// Per-pixel blur class indices in [1, R], optionally with the soft
/// probability form they were hardened from.
struct BlurSegmentationMap {
  Eigen::ArrayXXi indices;                 // 1-based class indices
  std::vector<Eigen::ArrayXXf> soft;       // empty, or R probability planes

  int rows() const { return static_cast<int>(indices.rows()); }
  int cols() const { return static_cast<int>(indices.cols()); }
};

/// The R deconvolved images nu^(r) aligned with the blur image, plus their
/// luma planes used for assignment.
struct DeconvolvedClassImages {
  std::vector<Image> planes;
  std::vector<PlaneD> luma_planes;

  int count() const { return static_cast<int>(planes.size()); }
};

/// Log-Fourier basis kernels at fixed spectral dimensions together with
/// their spatial projection.
class LogKernelSet {
 public:
  LogKernelSet(const BasisKernelSet& kernels, int rows, int cols,
               double eps_rel = kDefaultEpsRel);

  int count() const { return static_cast<int>(log_spectra_.size()); }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double eps_rel() const { return eps_rel_; }
  int side() const { return spatial_shadow_.side(); }

  const LogSpectrum& log_spectrum(int r) const {
    return log_spectra_[static_cast<size_t>(r)];
  }
  const BasisKernelSet& spatial_shadow() const { return spatial_shadow_; }

  /// Replace class r with the projection of raw log-spectrum values onto
  /// the valid-kernel set (non-negative, sum 1, support <= side).
  void set_projected(int r, const Eigen::ArrayXXcd& raw_values);

  LogKernelSet permuted(const std::vector<int>& order) const;

 private:
  std::vector<LogSpectrum> log_spectra_;
  BasisKernelSet spatial_shadow_;
  int rows_, cols_;
  double eps_rel_;
};

/// Log-Fourier transform of every channel of y at the kernel set's
/// spectral dimensions.
std::vector<LogSpectrum> image_log_spectra(const Image& y, int rows, int cols,
                                           double eps_rel);

/// nu^(r) = F_L^-1(Y - K^(r)) per class, full color plus luma.
DeconvolvedClassImages deconvolve_class_images(const Image& y,
                                               const LogKernelSet& kernels);

/// rho_i = argmin_r (nu^(r)_i - x_i)^2 on luma; ties go to the lowest index.
BlurSegmentationMap oracle_assign(const DeconvolvedClassImages& nu,
                                  const Image& x);

/// Per pixel, copy all channels from plane rho_i.
Image assemble(const DeconvolvedClassImages& nu, const BlurSegmentationMap& rho);

/// Harden a soft map by per-pixel argmax (lowest-index ties); the soft field
/// is replaced by its one-hot form. Idempotent.
BlurSegmentationMap soft_to_onehot(const BlurSegmentationMap& soft_map);

/// Latent sharp estimate: assemble under rho when given, otherwise the
/// single class plane with the lowest total luma variation.
Image latent_estimate(const Image& y, const LogKernelSet& kernels,
                      const std::optional<BlurSegmentationMap>& rho);

/// d(x_d, x) + lambda * d(x_l, x) with d = -PSNR (capped at 100 dB).
double class_loss(const Image& x_d, const Image& x_l, const Image& x,
                  double lambda);

/// Analytic gradient of class_loss w.r.t. the complex log-spectrum entries
/// of each class, with both segmentation maps held fixed. Real part of each
/// gradient entry pairs with the log-magnitude, imaginary with the phase.
std::vector<Eigen::ArrayXXcd> kernel_gradient(
    const Image& y, const Image& x, const BlurSegmentationMap& rho,
    const BlurSegmentationMap& rho_latent, const LogKernelSet& kernels,
    double lambda);

struct FitOptions {
  int class_count = 8;
  double lambda = 1.0;
  int alternations = 30;
  int grad_steps = 20;
  double step = 0.1;
  int kernel_side = 31;
  double eps_rel = kDefaultEpsRel;
  uint64_t seed = 0;
  std::string init = "motion";  // "motion" | "spectral"
  std::optional<BasisKernelSet> initial_kernels;
};

struct FitReport {
  std::vector<double> loss_at_assign;   // one value per alternation
  std::vector<double> loss_trace;       // every accepted evaluation
  std::vector<std::vector<long>> class_histogram;  // per image, per class
  double final_step = 0.0;
};

struct FitResult {
  BasisKernelSet kernels;
  std::vector<BlurSegmentationMap> maps;  // one per training pair
  FitReport report;
};

/// Default spread-of-motions initialization for R classes.
BasisKernelSet motion_init_basis(int class_count, int side);

/// Alternating minimization of the classification loss: exact assignment
/// steps interleaved with projected gradient steps on the kernel taps
/// (log-spectrum gradient chained through the spectral parametrization).
/// Deterministic given the options.
FitResult fit_basis_kernels(const std::vector<std::pair<Image, Image>>& pairs,
                            const FitOptions& opt);
FitResult fit_basis_kernels(const DatasetManifest& dataset, const FitOptions& opt);

// Segmentation-map PNG convention: class r stored as gray r*floor(255/R).
void save_segmentation_png(const BlurSegmentationMap& map, int class_count,
                           const std::string& path);
BlurSegmentationMap load_segmentation_png(const std::string& path, int class_count);

}  // namespace blurseg

#endif  // BLURSEG_DISCRETIZE_HPP
