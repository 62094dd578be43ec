#include "blurseg/discretize.hpp"

#include "blurseg/metrics.hpp"
#include "blurseg/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace blurseg {

namespace {

constexpr double kCapMse = 1e-10;  // MSE at the 100 dB PSNR cap

double neg_psnr(const Image& a, const Image& b) { return -psnr(a, b); }

}  // namespace

LogKernelSet::LogKernelSet(const BasisKernelSet& kernels, int rows, int cols,
                           double eps_rel)
    : spatial_shadow_(kernels), rows_(rows), cols_(cols), eps_rel_(eps_rel) {
  kernels.validate();
  for (const Kernel& k : kernels.kernels) {
    const Spectrum spec = kernel_spectrum(k, rows, cols);
    log_spectra_.push_back(log_fourier(spec, relative_floor(spec, eps_rel)));
  }
}

void LogKernelSet::set_projected(int r, const Eigen::ArrayXXcd& raw_values) {
  Kernel projected = log_spectrum_to_kernel(LogSpectrum{raw_values}, side());
  const Spectrum spec = kernel_spectrum(projected, rows_, cols_);
  log_spectra_[static_cast<size_t>(r)] =
      log_fourier(spec, relative_floor(spec, eps_rel_));
  spatial_shadow_.kernels[static_cast<size_t>(r)] = std::move(projected);
}

LogKernelSet LogKernelSet::permuted(const std::vector<int>& order) const {
  LogKernelSet out(*this);
  for (int r = 0; r < count(); ++r) {
    const size_t src = static_cast<size_t>(order[static_cast<size_t>(r)]);
    out.log_spectra_[static_cast<size_t>(r)] = log_spectra_[src];
    out.spatial_shadow_.kernels[static_cast<size_t>(r)] =
        spatial_shadow_.kernels[src];
  }
  return out;
}

std::vector<LogSpectrum> image_log_spectra(const Image& y, int rows, int cols,
                                           double eps_rel) {
  std::vector<LogSpectrum> out;
  for (int c = 0; c < y.channels(); ++c) {
    const Spectrum spec = fft2(y.plane(c), rows, cols);
    out.push_back(log_fourier(spec, relative_floor(spec, eps_rel)));
  }
  return out;
}

DeconvolvedClassImages deconvolve_class_images(const Image& y,
                                               const LogKernelSet& kernels) {
  if (kernels.rows() < y.height() || kernels.cols() < y.width())
    throw std::invalid_argument("deconvolve_class_images: dimension mismatch");
  const std::vector<LogSpectrum> Y =
      image_log_spectra(y, kernels.rows(), kernels.cols(), kernels.eps_rel());

  DeconvolvedClassImages nu;
  for (int r = 0; r < kernels.count(); ++r) {
    Image plane(y.height(), y.width(), y.channels());
    for (int c = 0; c < y.channels(); ++c)
      plane.plane(c) =
          deconvolve(Y[static_cast<size_t>(c)], kernels.log_spectrum(r),
                     y.height(), y.width())
              .cast<float>();
    nu.luma_planes.push_back(luma(plane).cast<double>());
    nu.planes.push_back(std::move(plane));
  }
  return nu;
}

BlurSegmentationMap oracle_assign(const DeconvolvedClassImages& nu,
                                  const Image& x) {
  const int R = nu.count();
  if (R < 1) throw std::invalid_argument("oracle_assign: empty class stack");
  const int h = x.height(), w = x.width();
  if (nu.luma_planes[0].rows() != h || nu.luma_planes[0].cols() != w)
    throw std::invalid_argument("oracle_assign: dimension mismatch");

  const PlaneD target = luma(x).cast<double>();
  BlurSegmentationMap map;
  map.indices.resize(h, w);
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) {
      int best = 1;
      double best_err = std::pow(nu.luma_planes[0](r, c) - target(r, c), 2.0);
      for (int k = 1; k < R; ++k) {
        const double err =
            std::pow(nu.luma_planes[static_cast<size_t>(k)](r, c) - target(r, c), 2.0);
        if (err < best_err) {
          best_err = err;
          best = k + 1;
        }
      }
      map.indices(r, c) = best;
    }
  }
  return map;
}

Image assemble(const DeconvolvedClassImages& nu, const BlurSegmentationMap& rho) {
  const int R = nu.count();
  const Image& first = nu.planes[0];
  if (rho.rows() != first.height() || rho.cols() != first.width())
    throw std::invalid_argument("assemble: dimension mismatch");
  if ((rho.indices < 1).any() || (rho.indices > R).any())
    throw std::invalid_argument("assemble: class index out of range");

  Image out(first.height(), first.width(), first.channels());
  for (int c = 0; c < first.channels(); ++c) {
    Plane& dst = out.plane(c);
    for (int col = 0; col < first.width(); ++col)
      for (int row = 0; row < first.height(); ++row)
        dst(row, col) =
            nu.planes[static_cast<size_t>(rho.indices(row, col) - 1)].plane(c)(row, col);
  }
  return out;
}

BlurSegmentationMap soft_to_onehot(const BlurSegmentationMap& soft_map) {
  const int R = static_cast<int>(soft_map.soft.size());
  if (R < 1) throw std::invalid_argument("soft_to_onehot: no soft planes");
  const int h = static_cast<int>(soft_map.soft[0].rows());
  const int w = static_cast<int>(soft_map.soft[0].cols());

  BlurSegmentationMap out;
  out.indices.resize(h, w);
  out.soft.assign(static_cast<size_t>(R), Plane::Zero(h, w));
  for (int col = 0; col < w; ++col) {
    for (int row = 0; row < h; ++row) {
      int best = 0;
      float best_p = soft_map.soft[0](row, col);
      for (int k = 1; k < R; ++k) {
        const float p = soft_map.soft[static_cast<size_t>(k)](row, col);
        if (p > best_p) {
          best_p = p;
          best = k;
        }
      }
      out.indices(row, col) = best + 1;
      out.soft[static_cast<size_t>(best)](row, col) = 1.0f;
    }
  }
  return out;
}

Image latent_estimate(const Image& y, const LogKernelSet& kernels,
                      const std::optional<BlurSegmentationMap>& rho) {
  const DeconvolvedClassImages nu = deconvolve_class_images(y, kernels);
  if (rho) return assemble(nu, *rho);

  // crude sharpness proxy: lowest total luma variation wins
  int best = 0;
  double best_tv = std::numeric_limits<double>::infinity();
  for (int r = 0; r < nu.count(); ++r) {
    const PlaneD& p = nu.luma_planes[static_cast<size_t>(r)];
    double tv = 0.0;
    if (p.rows() > 1)
      tv += (p.bottomRows(p.rows() - 1) - p.topRows(p.rows() - 1)).abs().sum();
    if (p.cols() > 1)
      tv += (p.rightCols(p.cols() - 1) - p.leftCols(p.cols() - 1)).abs().sum();
    if (tv < best_tv) {
      best_tv = tv;
      best = r;
    }
  }
  return nu.planes[static_cast<size_t>(best)];
}

double class_loss(const Image& x_d, const Image& x_l, const Image& x,
                  double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("class_loss: lambda < 0");
  return neg_psnr(x_d, x) + lambda * neg_psnr(x_l, x);
}

namespace {

// Accumulates the gradient of wterm * (-PSNR(assemble(nu, map), x)) with
// respect to each class log-spectrum. E[c][r] = exp(Y_c - K_r) must match
// the nu planes the map was computed against.
void accumulate_term_gradient(
    const std::vector<std::vector<Eigen::ArrayXXcd>>& E,
    const DeconvolvedClassImages& nu, const BlurSegmentationMap& map,
    const Image& x, double wterm, std::vector<Eigen::ArrayXXcd>* grad) {
  if (wterm == 0.0) return;
  const int R = nu.count();
  const int h = x.height(), w = x.width(), C = x.channels();
  const int srows = static_cast<int>(E[0][0].rows());
  const int scols = static_cast<int>(E[0][0].cols());
  const double n_samples = static_cast<double>(h) * w * C;

  const Image xt = assemble(nu, map);
  double mse = 0.0;
  for (int c = 0; c < C; ++c)
    mse += (xt.plane(c).cast<double>() - x.plane(c).cast<double>()).square().sum();
  mse /= n_samples;
  if (mse <= kCapMse) return;  // inside the PSNR cap: flat loss

  const double scale = wterm * (10.0 / std::numbers::ln10) * 2.0 / (mse * n_samples);
  for (int c = 0; c < C; ++c) {
    const PlaneD diff =
        xt.plane(c).cast<double>() - x.plane(c).cast<double>();
    for (int r = 0; r < R; ++r) {
      Eigen::ArrayXXcd weights = Eigen::ArrayXXcd::Zero(srows, scols);
      bool any = false;
      for (int col = 0; col < w; ++col)
        for (int row = 0; row < h; ++row)
          if (map.indices(row, col) == r + 1) {
            weights(row, col) = scale * diff(row, col);
            any = true;
          }
      if (!any) continue;
      const Eigen::ArrayXXcd back = ifft2(weights);
      const Eigen::ArrayXXcd t = E[static_cast<size_t>(c)][static_cast<size_t>(r)] * back;
      (*grad)[static_cast<size_t>(r)] += -t.real().cast<std::complex<double>>() +
                                         std::complex<double>(0, 1) *
                                             t.imag().cast<std::complex<double>>();
    }
  }
}

}  // namespace

std::vector<Eigen::ArrayXXcd> kernel_gradient(
    const Image& y, const Image& x, const BlurSegmentationMap& rho,
    const BlurSegmentationMap& rho_latent, const LogKernelSet& kernels,
    double lambda) {
  const int R = kernels.count();
  const int srows = kernels.rows(), scols = kernels.cols();
  const std::vector<LogSpectrum> Y =
      image_log_spectra(y, srows, scols, kernels.eps_rel());

  // E[c][r] = exp(Y_c - K_r); nu planes recomputed from the same E
  std::vector<std::vector<Eigen::ArrayXXcd>> E(static_cast<size_t>(y.channels()));
  DeconvolvedClassImages nu;
  nu.planes.assign(static_cast<size_t>(R),
                   Image(y.height(), y.width(), y.channels()));
  for (int c = 0; c < y.channels(); ++c) {
    for (int r = 0; r < R; ++r) {
      Eigen::ArrayXXcd e =
          (Y[static_cast<size_t>(c)].values - kernels.log_spectrum(r).values).exp();
      nu.planes[static_cast<size_t>(r)].plane(c) =
          ifft2(e)
              .topLeftCorner(y.height(), y.width())
              .real()
              .cast<float>();
      E[static_cast<size_t>(c)].push_back(std::move(e));
    }
  }
  for (int r = 0; r < R; ++r)
    nu.luma_planes.push_back(luma(nu.planes[static_cast<size_t>(r)]).cast<double>());

  std::vector<Eigen::ArrayXXcd> grad(static_cast<size_t>(R),
                                     Eigen::ArrayXXcd::Zero(srows, scols));
  accumulate_term_gradient(E, nu, rho, x, 1.0, &grad);
  accumulate_term_gradient(E, nu, rho_latent, x, lambda, &grad);
  return grad;
}

BasisKernelSet motion_init_basis(int class_count, int side) {
  BasisKernelSet set;
  set.kernels.push_back(delta_kernel(side));
  for (int r = 1; r < class_count; ++r) {
    MotionSpec ms;
    ms.length = std::min<double>(side, 3.0 + 2.0 * ((r - 1) / 4));
    ms.angle = (std::numbers::pi / 4.0) * ((r - 1) % 4);
    set.kernels.push_back(linear_motion_kernel(ms, side));
  }
  return set;
}

namespace {

BasisKernelSet spectral_init_basis(const std::vector<std::pair<Image, Image>>& pairs,
                                   const FitOptions& opt, int rows, int cols) {
  // smoothed mean of (Y - X) across the dataset, then per-class perturbation
  Eigen::ArrayXXcd mean_diff = Eigen::ArrayXXcd::Zero(rows, cols);
  long terms = 0;
  for (const auto& [sharp, blur] : pairs) {
    const auto Y = image_log_spectra(blur, rows, cols, opt.eps_rel);
    const auto X = image_log_spectra(sharp, rows, cols, opt.eps_rel);
    for (size_t c = 0; c < Y.size(); ++c) {
      mean_diff += Y[c].values - X[c].values;
      ++terms;
    }
  }
  mean_diff /= static_cast<double>(std::max<long>(1, terms));
  const Kernel base =
      log_spectrum_to_kernel(LogSpectrum{mean_diff}, opt.kernel_side);

  std::mt19937_64 rng(opt.seed + 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> jitter(0.0, 0.02 / (opt.kernel_side));
  BasisKernelSet set;
  for (int r = 0; r < opt.class_count; ++r) {
    Eigen::ArrayXXd taps = base.taps;
    if (r > 0)
      for (Eigen::Index i = 0; i < taps.size(); ++i)
        taps.data()[i] += std::abs(jitter(rng));
    set.kernels.push_back(project_to_valid(std::move(taps)));
  }
  return set;
}

// Chain the log-spectrum gradient down to the kernel taps: with
// K_hat = exp(log-spectrum) and dK_hat/dtap a Fourier basis vector at the
// tap's wrapped position, dL/dtap = Re(sum_w conj(G(w)) / K_hat(w) * e^{-iwx}).
// Stepping on taps keeps the simplex projection local and well-behaved,
// which stepping on raw log-spectra is not.
Eigen::ArrayXXd gradient_to_taps(const Eigen::ArrayXXcd& grad_ls,
                                 const LogSpectrum& kls, int side) {
  const Eigen::ArrayXXcd khat = kls.values.exp();
  const Eigen::ArrayXXcd h = grad_ls.conjugate() / khat;
  const Eigen::ArrayXXcd t =
      static_cast<double>(h.size()) * ifft2(h.conjugate()).conjugate();
  const int rows = static_cast<int>(t.rows()), cols = static_cast<int>(t.cols());
  const int half = side / 2;
  Eigen::ArrayXXd g(side, side);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c)
      g(r, c) = t(((r - half) % rows + rows) % rows,
                  ((c - half) % cols + cols) % cols)
                    .real();
  return g;
}

// Least-squares kernel refit over the pixels currently assigned to class r:
// min_k sum_i sum_{p in class r} ((k * x_i)(p) - y_i(p))^2 with periodic
// convolution, solved through S^2 x S^2 normal equations and projected onto
// the simplex. Exact for noise-free uniform blurs with correct assignments.
Kernel masked_ls_kernel(const std::vector<std::pair<Image, Image>>& pairs,
                        const std::vector<Eigen::ArrayXXi>& masks,
                        int cls, int side, const Kernel& fallback) {
  const int dim = side * side, half = side / 2;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd g(dim);
  long used = 0;

  for (size_t i = 0; i < pairs.size(); ++i) {
    const Image& x = pairs[i].first;
    const Image& y = pairs[i].second;
    const int h = x.height(), w = x.width();
    for (int ch = 0; ch < x.channels(); ++ch) {
      const Plane& xp = x.plane(ch);
      const Plane& yp = y.plane(ch);
      for (int col = 0; col < w; ++col) {
        for (int row = 0; row < h; ++row) {
          if (masks[i](row, col) != cls + 1) continue;
          int j = 0;
          for (int dr = -half; dr <= half; ++dr)
            for (int dc = -half; dc <= half; ++dc)
              g(j++) = xp(((row - dr) % h + h) % h, ((col - dc) % w + w) % w);
          A.selfadjointView<Eigen::Lower>().rankUpdate(g);
          b += g * static_cast<double>(yp(row, col));
          ++used;
        }
      }
    }
  }
  if (used == 0) return fallback;
  A = A.selfadjointView<Eigen::Lower>();
  A.diagonal().array() += 1e-9 * A.trace() / dim;
  const Eigen::VectorXd k = A.ldlt().solve(b);
  Eigen::ArrayXXd taps(side, side);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) taps(r, c) = k(r * side + c);
  return project_to_valid(std::move(taps));
}

// Assignment restricted to confident pixels: class index where the best
// luma error beats the runner-up by a clear margin, 0 elsewhere. Flat
// regions tie across classes and would otherwise flood the lowest class's
// least-squares system with pixels blurred by a different kernel.
Eigen::ArrayXXi confident_assign(const DeconvolvedClassImages& nu,
                                 const Image& x) {
  const int h = x.height(), w = x.width();
  const int R = nu.count();
  const PlaneD target = luma(x).cast<double>();
  Eigen::ArrayXXi out = Eigen::ArrayXXi::Zero(h, w);
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) {
      double best = std::numeric_limits<double>::infinity(), second = best;
      int arg = 0;
      for (int k = 0; k < R; ++k) {
        const double e =
            std::pow(nu.luma_planes[static_cast<size_t>(k)](r, c) - target(r, c), 2.0);
        if (e < best) {
          second = best;
          best = e;
          arg = k;
        } else if (e < second) {
          second = e;
        }
      }
      if (R > 1 && second > 4.0 * best + 1e-6) out(r, c) = arg + 1;
    }
  }
  return out;
}

}  // namespace

FitResult fit_basis_kernels(const std::vector<std::pair<Image, Image>>& pairs,
                            const FitOptions& opt) {
  if (opt.class_count < 1)
    throw std::invalid_argument("fit_basis_kernels: class_count < 1");
  if (pairs.empty())
    throw std::invalid_argument("fit_basis_kernels: empty dataset");

  const int rows = pairs[0].second.height();
  const int cols = pairs[0].second.width();
  for (const auto& [sharp, blur] : pairs)
    if (blur.height() != rows || blur.width() != cols || !sharp.same_shape(blur))
      throw std::invalid_argument("fit_basis_kernels: mismatched pair dimensions");

  BasisKernelSet init;
  if (opt.initial_kernels) {
    init = *opt.initial_kernels;
    if (init.count() != opt.class_count)
      throw std::invalid_argument("fit_basis_kernels: initial kernel count != R");
  } else if (opt.init == "spectral") {
    init = spectral_init_basis(pairs, opt, rows, cols);
  } else {
    init = motion_init_basis(opt.class_count, opt.kernel_side);
  }
  LogKernelSet K(init, rows, cols, opt.eps_rel);

  const double lam = opt.lambda;
  auto eval_loss = [&](const LogKernelSet& ks,
                       const std::vector<BlurSegmentationMap>& maps) {
    double total = 0.0;
    for (size_t i = 0; i < pairs.size(); ++i) {
      const Image xt = assemble(deconvolve_class_images(pairs[i].second, ks), maps[i]);
      total += (1.0 + lam) * neg_psnr(xt, pairs[i].first);
    }
    return total / static_cast<double>(pairs.size());
  };

  FitReport report;
  std::vector<BlurSegmentationMap> maps(pairs.size());
  double step = opt.step;

  for (int alt = 0; alt < opt.alternations; ++alt) {
    // (a) exact assignment
    for (size_t i = 0; i < pairs.size(); ++i)
      maps[i] = oracle_assign(deconvolve_class_images(pairs[i].second, K),
                              pairs[i].first);
    double loss = eval_loss(K, maps);
    report.loss_at_assign.push_back(loss);
    report.loss_trace.push_back(loss);

    // (b) closed-form per-class refit, judged under its own reassignment so
    // stale labels cannot veto a better kernel pair
    {
      std::vector<Eigen::ArrayXXi> masks(pairs.size());
      for (size_t i = 0; i < pairs.size(); ++i)
        masks[i] = confident_assign(deconvolve_class_images(pairs[i].second, K),
                                    pairs[i].first);
      BasisKernelSet cand_set;
      for (int r = 0; r < opt.class_count; ++r)
        cand_set.kernels.push_back(masked_ls_kernel(
            pairs, masks, r, K.side(),
            K.spatial_shadow().kernels[static_cast<size_t>(r)]));
      LogKernelSet cand(cand_set, rows, cols, opt.eps_rel);
      std::vector<BlurSegmentationMap> cand_maps(pairs.size());
      for (size_t i = 0; i < pairs.size(); ++i)
        cand_maps[i] = oracle_assign(deconvolve_class_images(pairs[i].second, cand),
                                     pairs[i].first);
      const double cand_loss = eval_loss(cand, cand_maps);
      if (cand_loss <= loss) {
        K = std::move(cand);
        maps = std::move(cand_maps);
        loss = cand_loss;
        report.loss_trace.push_back(loss);
      }
    }

    // (c) projected gradient steps on the kernel taps, maps fixed
    for (int g = 0; g < opt.grad_steps; ++g) {
      std::vector<Eigen::ArrayXXcd> grad(static_cast<size_t>(opt.class_count),
                                         Eigen::ArrayXXcd::Zero(rows, cols));
      for (size_t i = 0; i < pairs.size(); ++i) {
        const auto gi = kernel_gradient(pairs[i].second, pairs[i].first, maps[i],
                                        maps[i], K, lam);
        for (size_t r = 0; r < grad.size(); ++r)
          grad[r] += gi[r] / static_cast<double>(pairs.size());
      }
      std::vector<Eigen::ArrayXXd> tap_grad;
      for (int r = 0; r < opt.class_count; ++r)
        tap_grad.push_back(gradient_to_taps(grad[static_cast<size_t>(r)],
                                            K.log_spectrum(r), K.side()));

      bool accepted = false;
      for (int attempt = 0; attempt < 8 && !accepted; ++attempt) {
        BasisKernelSet cand_set;
        for (int r = 0; r < opt.class_count; ++r)
          cand_set.kernels.push_back(project_to_valid(
              K.spatial_shadow().kernels[static_cast<size_t>(r)].taps -
              step * tap_grad[static_cast<size_t>(r)]));
        LogKernelSet cand(cand_set, rows, cols, opt.eps_rel);
        const double cand_loss = eval_loss(cand, maps);
        if (cand_loss <= loss) {
          K = std::move(cand);
          loss = cand_loss;
          report.loss_trace.push_back(loss);
          accepted = true;
          step = std::min(step * 1.5, 1e6);  // recover from earlier halving
        } else {
          step *= 0.5;  // rollback: keep K, retry smaller
        }
      }
      if (step < 1e-14) break;
    }
    // keep later alternations alive: assignments and the closed-form refit
    // can still make progress after the gradient phase stalls
    step = std::max(step, opt.step * 1e-3);
  }

  // final assignment against the fitted kernels
  for (size_t i = 0; i < pairs.size(); ++i)
    maps[i] = oracle_assign(deconvolve_class_images(pairs[i].second, K),
                            pairs[i].first);

  for (const BlurSegmentationMap& m : maps) {
    std::vector<long> hist(static_cast<size_t>(opt.class_count), 0);
    for (int c = 0; c < m.cols(); ++c)
      for (int r = 0; r < m.rows(); ++r)
        ++hist[static_cast<size_t>(m.indices(r, c) - 1)];
    report.class_histogram.push_back(std::move(hist));
  }
  report.final_step = step;

  return FitResult{K.spatial_shadow(), std::move(maps), std::move(report)};
}

FitResult fit_basis_kernels(const DatasetManifest& dataset, const FitOptions& opt) {
  std::vector<std::pair<Image, Image>> pairs;
  for (const ManifestEntry& e : dataset.entries)
    pairs.emplace_back(load_image(e.sharp_path), load_image(e.blur_path));
  return fit_basis_kernels(pairs, opt);
}

void save_segmentation_png(const BlurSegmentationMap& map, int class_count,
                           const std::string& path) {
  if (class_count < 1 || class_count > 255)
    throw std::invalid_argument("save_segmentation_png: bad class count");
  const int level = 255 / class_count;
  Image img(map.rows(), map.cols(), 1);
  img.plane(0) = (map.indices * level).cast<float>() / 255.0f;
  save_image(img, path);
}

BlurSegmentationMap load_segmentation_png(const std::string& path,
                                          int class_count) {
  const Image img = load_image(path);
  const int level = 255 / class_count;
  BlurSegmentationMap map;
  map.indices.resize(img.height(), img.width());
  for (int c = 0; c < img.width(); ++c)
    for (int r = 0; r < img.height(); ++r) {
      const int idx = static_cast<int>(
          std::lround(img.plane(0)(r, c) * 255.0f / static_cast<float>(level)));
      if (idx < 1 || idx > class_count)
        throw std::runtime_error("load_segmentation_png: index out of range");
      map.indices(r, c) = idx;
    }
  return map;
}

}  // namespace blurseg
