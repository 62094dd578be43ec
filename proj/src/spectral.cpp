#include "blurseg/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <cfloat>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace blurseg {

namespace {

Eigen::ArrayXXcd fft2_complex(const Eigen::ArrayXXcd& in, bool inverse) {
  const Eigen::Index rows = in.rows(), cols = in.cols();
  Eigen::MatrixXcd work = in.matrix();
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);

  Eigen::VectorXcd vec, out;
  for (Eigen::Index r = 0; r < rows; ++r) {
    vec = work.row(r).transpose();
    if (inverse)
      fft.inv(out, vec);
    else
      fft.fwd(out, vec);
    work.row(r) = out.transpose();
  }
  for (Eigen::Index c = 0; c < cols; ++c) {
    vec = work.col(c);
    if (inverse)
      fft.inv(out, vec);
    else
      fft.fwd(out, vec);
    work.col(c) = out;
  }
  if (inverse) work /= static_cast<double>(rows * cols);
  return work.array();
}

}  // namespace

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

Spectrum fft2(const PlaneD& channel, int pad_rows, int pad_cols) {
  if (pad_rows < channel.rows() || pad_cols < channel.cols())
    throw std::invalid_argument("fft2: pad dims smaller than input");
  Eigen::ArrayXXcd padded = Eigen::ArrayXXcd::Zero(pad_rows, pad_cols);
  padded.topLeftCorner(channel.rows(), channel.cols()) =
      channel.cast<std::complex<double>>();
  return fft2_complex(padded, false);
}

Spectrum fft2(const Plane& channel, int pad_rows, int pad_cols) {
  return fft2(channel.cast<double>().eval(), pad_rows, pad_cols);
}

Eigen::ArrayXXcd ifft2(const Eigen::ArrayXXcd& spec) {
  return fft2_complex(spec, true);
}

double relative_floor(const Spectrum& spec, double rel) {
  const double peak = spec.abs().maxCoeff();
  return std::max(peak * rel, DBL_MIN);
}

LogSpectrum log_fourier(const Spectrum& spec, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("log_fourier: eps must be > 0");
  LogSpectrum ls;
  ls.values.resize(spec.rows(), spec.cols());
  const double log_eps = std::log(eps);
  for (Eigen::Index c = 0; c < spec.cols(); ++c) {
    for (Eigen::Index r = 0; r < spec.rows(); ++r) {
      const std::complex<double> z = spec(r, c);
      const double mag = std::abs(z);
      const double phase = mag > 0 ? std::arg(z) : 0.0;
      ls.values(r, c) = {mag > eps ? std::log(mag) : log_eps, phase};
    }
  }
  return ls;
}

InverseResult inv_log_fourier(const LogSpectrum& ls, int out_rows, int out_cols) {
  if (out_rows > ls.rows() || out_cols > ls.cols())
    throw std::invalid_argument("inv_log_fourier: crop dims exceed spectrum");
  const Eigen::ArrayXXcd full = ifft2(ls.values.exp());
  InverseResult res;
  res.plane = full.topLeftCorner(out_rows, out_cols).real();
  res.imag_residue =
      std::sqrt(full.imag().square().sum() / static_cast<double>(full.size()));
  return res;
}

PlaneD deconvolve(const LogSpectrum& y_ls, const LogSpectrum& k_ls,
                  int out_rows, int out_cols) {
  if (y_ls.rows() != k_ls.rows() || y_ls.cols() != k_ls.cols())
    throw std::invalid_argument("deconvolve: spectral dimension mismatch");
  LogSpectrum diff{y_ls.values - k_ls.values};
  return inv_log_fourier(diff, out_rows, out_cols).plane;
}

Spectrum kernel_spectrum(const Kernel& k, int rows, int cols) {
  const int s = k.size();
  if (s > rows || s > cols)
    throw std::invalid_argument("kernel_spectrum: kernel larger than field");
  // embed with the kernel center wrapped to (0, 0)
  PlaneD field = PlaneD::Zero(rows, cols);
  const int half = s / 2;
  for (int r = 0; r < s; ++r) {
    for (int c = 0; c < s; ++c) {
      const int rr = ((r - half) % rows + rows) % rows;
      const int cc = ((c - half) % cols + cols) % cols;
      field(rr, cc) += k.taps(r, c);
    }
  }
  return fft2(field, rows, cols);
}

Kernel log_spectrum_to_kernel(const LogSpectrum& ls, int side) {
  const int rows = ls.rows(), cols = ls.cols();
  const PlaneD field = inv_log_fourier(ls, rows, cols).plane;
  const int half = side / 2;
  Eigen::ArrayXXd taps(side, side);
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const int rr = ((r - half) % rows + rows) % rows;
      const int cc = ((c - half) % cols + cols) % cols;
      taps(r, c) = field(rr, cc);
    }
  }
  return project_to_valid(std::move(taps));
}

Plane edge_taper(const Plane& channel, double alpha) {
  const int rows = static_cast<int>(channel.rows());
  const int cols = static_cast<int>(channel.cols());
  auto tukey = [alpha](int n) {
    Eigen::ArrayXd w = Eigen::ArrayXd::Ones(n);
    const int edge = static_cast<int>(alpha * (n - 1) / 2.0);
    for (int i = 0; i <= edge && i < n; ++i) {
      const double t =
          0.5 * (1.0 + std::cos(std::numbers::pi *
                                (2.0 * i / (alpha * (n - 1)) - 1.0)));
      w(i) = t;
      w(n - 1 - i) = t;
    }
    return w;
  };
  const Eigen::ArrayXd wr = tukey(rows), wc = tukey(cols);
  const float mean = channel.mean();
  Plane out(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) {
      const float w = static_cast<float>(wr(r) * wc(c));
      out(r, c) = mean + w * (channel(r, c) - mean);
    }
  return out;
}

}  // namespace blurseg
