#ifndef BLURSEG_SPECTRAL_HPP
#define BLURSEG_SPECTRAL_HPP

#include "blurseg/image.hpp"
#include "blurseg/kernel.hpp"

#include <Eigen/Dense>

#include <complex>

namespace blurseg {

using Spectrum = Eigen::ArrayXXcd;  // unnormalized 2-D DFT bins

/// Complex log of a spectrum: real part log|z| (floored at log eps),
/// imaginary part the principal-branch phase in (-pi, pi].
struct LogSpectrum {
  Eigen::ArrayXXcd values;

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

/// Result of an inverse log-Fourier transform. The imaginary residue norm
/// is a diagnostic: it stays near zero when the log spectrum came from a
/// real image.
struct InverseResult {
  PlaneD plane;
  double imag_residue = 0.0;
};

int next_pow2(int n);

/// Forward DFT of the zero-padded channel. pad dims must cover the input.
Spectrum fft2(const PlaneD& channel, int pad_rows, int pad_cols);
Spectrum fft2(const Plane& channel, int pad_rows, int pad_cols);

/// Normalized inverse DFT (complex output).
Eigen::ArrayXXcd ifft2(const Eigen::ArrayXXcd& spec);

/// eps relative to the peak magnitude of spec; never below DBL_MIN.
double relative_floor(const Spectrum& spec, double rel);

/// Per bin: log(max(|z|, eps)) + i*arg(z); zero-magnitude bins get phase 0.
LogSpectrum log_fourier(const Spectrum& spec, double eps);

/// exp each bin, inverse DFT, crop to out dims; returns real part plus the
/// imaginary residue norm.
InverseResult inv_log_fourier(const LogSpectrum& ls, int out_rows, int out_cols);

/// Deconvolution by log-spectrum subtraction: F_L^-1(Y - K) cropped.
PlaneD deconvolve(const LogSpectrum& y_ls, const LogSpectrum& k_ls,
                  int out_rows, int out_cols);

/// DFT of the kernel circularly shifted so its center sits at the origin;
/// deconvolving with it introduces no spatial shift.
Spectrum kernel_spectrum(const Kernel& k, int rows, int cols);

/// Project a log-spectrum back to a valid spatial kernel: inverse transform,
/// recenter, crop to an odd side-length window, zero negatives, renormalize.
Kernel log_spectrum_to_kernel(const LogSpectrum& ls, int side);

/// Tukey-window taper toward the image mean, for real photographs where the
/// periodic boundary model does not hold.
Plane edge_taper(const Plane& channel, double alpha = 0.1);

constexpr double kDefaultEpsRel = 1e-6;

}  // namespace blurseg

#endif  // BLURSEG_SPECTRAL_HPP
