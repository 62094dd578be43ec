#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "blurseg/d2c.hpp"
#include "blurseg/discretize.hpp"
#include "blurseg/metrics.hpp"
#include "blurseg/pipeline.hpp"
#include "blurseg/spectral.hpp"
#include "blurseg/synth.hpp"
#include "test_util.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>

using namespace blurseg;
using namespace blurseg::testutil;

namespace {

class Criterion {
 public:
  Criterion(int id, const char* title) : id_(id), title_(title) {
    start_ = std::chrono::steady_clock::now();
  }
  void require(bool ok) { ok_ = ok_ && ok; }
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }
  ~Criterion() {
    std::printf("criterion %2d [%s]: %s (%.1fs)\n", id_, ok_ ? "PASS" : "FAIL",
                title_, elapsed());
    std::fflush(stdout);
  }
  bool ok() const { return ok_; }

 private:
  int id_;
  const char* title_;
  bool ok_ = true;
  std::chrono::steady_clock::time_point start_;
};

Kernel gaussian_kernel(int size, double sigma) {
  Eigen::ArrayXXd taps(size, size);
  const double mid = (size - 1) / 2.0;
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c)
      taps(r, c) = std::exp(-((r - mid) * (r - mid) + (c - mid) * (c - mid)) /
                            (2.0 * sigma * sigma));
  return project_to_valid(std::move(taps));
}

DeconvolvedClassImages fabricate_nu(const std::vector<Plane>& planes) {
  DeconvolvedClassImages nu;
  for (const Plane& p : planes) {
    Image img(p);
    nu.luma_planes.push_back(p.cast<double>());
    nu.planes.push_back(std::move(img));
  }
  return nu;
}

double assembled_sq_error(const DeconvolvedClassImages& nu,
                          const Eigen::ArrayXXi& indices, const Plane& target) {
  double err = 0.0;
  for (int c = 0; c < target.cols(); ++c)
    for (int r = 0; r < target.rows(); ++r)
      err += std::pow(
          nu.luma_planes[static_cast<size_t>(indices(r, c) - 1)](r, c) -
              static_cast<double>(target(r, c)),
          2.0);
  return err;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("1: log-domain spectral round trip") {
  Criterion crit(1, "spectral round trip on 50 seeded 64x64 images");
  std::mt19937_64 rng(1001);
  for (int i = 0; i < 50; ++i) {
    const Plane p = random_image(rng(), 64, 64, 1).plane(0);
    const Spectrum s = fft2(p, 64, 64);
    const LogSpectrum ls = log_fourier(s, relative_floor(s, kDefaultEpsRel));
    const InverseResult back = inv_log_fourier(ls, 64, 64);
    crit.require((back.plane.cast<float>() - p).abs().maxCoeff() < 1e-4);
  }
  crit.require(crit.elapsed() < 5.0);
  CHECK(crit.ok());
}

TEST_CASE("2: log-subtraction deconvolution matches Fourier division") {
  Criterion crit(2, "deconvolution vs Fourier-division oracle and blur inversion");
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> sig(0.5, 0.9);
  for (int i = 0; i < 20; ++i) {
    const Image y = random_image(rng(), 32, 32, 1);
    const Kernel k = gaussian_kernel(7, sig(rng));

    const Spectrum Y = fft2(y.plane(0), 32, 32);
    const Spectrum Kh = kernel_spectrum(k, 32, 32);
    const PlaneD oracle =
        ifft2((Y / Kh).matrix().array()).topLeftCorner(32, 32).real();

    const LogSpectrum yl = log_fourier(Y, relative_floor(Y, kDefaultEpsRel));
    const LogSpectrum kl = log_fourier(Kh, relative_floor(Kh, kDefaultEpsRel));
    const PlaneD ours = deconvolve(yl, kl, 32, 32);
    crit.require((ours - oracle).abs().maxCoeff() < 1e-5);
  }

  // deconvolving an exact gaussian blur recovers the sharp image
  for (int i = 0; i < 5; ++i) {
    const Image x = random_image(rng(), 64, 64, 1);
    const Kernel k = gaussian_kernel(9, sig(rng));
    const Image y = apply_uniform_blur(x, k, 0.0);
    BasisKernelSet set;
    set.kernels = {k};
    LogKernelSet K(set, 64, 64);
    const DeconvolvedClassImages nu = deconvolve_class_images(y, K);
    crit.require(psnr(nu.planes[0], x) >= 35.0);
  }
  crit.require(crit.elapsed() < 10.0);
  CHECK(crit.ok());
}

TEST_CASE("3: analytic kernel gradient vs central finite differences") {
  Criterion crit(3, "gradient check at 10 coordinates x 5 seeds, rel err < 1e-3");
  std::mt19937_64 rng(1003);
  for (int seed_trial = 0; seed_trial < 5; ++seed_trial) {
    const Image x = random_image(rng(), 16, 16, 1);
    const Image y = apply_uniform_blur(x, gaussian_kernel(5, 0.9), 0.0);
    BasisKernelSet set;
    set.kernels = {delta_kernel(5), linear_motion_kernel({3.0, 0.6, 0, 0.0}, 5)};
    LogKernelSet K(set, 16, 16);

    const BlurSegmentationMap rho = oracle_assign(deconvolve_class_images(y, K), x);
    BlurSegmentationMap latent;
    latent.indices = Eigen::ArrayXXi::Constant(16, 16, 2);
    const double lambda = 0.7;
    const auto grad = kernel_gradient(y, x, rho, latent, K, lambda);

    const std::vector<LogSpectrum> Y = image_log_spectra(y, 16, 16, K.eps_rel());
    auto loss_at = [&](const std::vector<Eigen::ArrayXXcd>& kvals) {
      std::vector<PlaneD> nu_d;
      for (const auto& kv : kvals)
        nu_d.push_back(deconvolve(Y[0], LogSpectrum{kv}, 16, 16));
      auto term = [&](const BlurSegmentationMap& m) {
        double mse = 0.0;
        for (int c = 0; c < 16; ++c)
          for (int r2 = 0; r2 < 16; ++r2) {
            const double v = nu_d[static_cast<size_t>(m.indices(r2, c) - 1)](r2, c) -
                             static_cast<double>(x.plane(0)(r2, c));
            mse += v * v;
          }
        // -PSNR of the assembled plane: +10 log10 of the normalized MSE
        return 10.0 * std::log10(std::max(mse / 256.0, 1e-10));
      };
      return term(rho) + lambda * term(latent);
    };

    const double h = 1e-4;
    for (int probe = 0; probe < 10; ++probe) {
      const int r = static_cast<int>(rng() % 2);
      const int br = static_cast<int>(rng() % 16), bc = static_cast<int>(rng() % 16);
      const bool real_part = (rng() & 1) != 0;
      const std::complex<double> delta =
          real_part ? std::complex<double>(h, 0) : std::complex<double>(0, h);

      std::vector<Eigen::ArrayXXcd> kv{K.log_spectrum(0).values,
                                       K.log_spectrum(1).values};
      kv[static_cast<size_t>(r)](br, bc) += delta;
      const double up = loss_at(kv);
      kv[static_cast<size_t>(r)](br, bc) -= 2.0 * delta;
      const double down = loss_at(kv);
      const double fd = (up - down) / (2.0 * h);
      const double analytic = real_part ? grad[static_cast<size_t>(r)](br, bc).real()
                                        : grad[static_cast<size_t>(r)](br, bc).imag();
      crit.require(std::abs(fd - analytic) / std::max(std::abs(fd), 1e-8) < 1e-3);
    }
  }
  crit.require(crit.elapsed() < 30.0);
  CHECK(crit.ok());
}

TEST_CASE("4: assignment optimality by brute force") {
  Criterion crit(4, "oracle assignment beats constant, random, and exhaustive maps");
  std::mt19937_64 rng(1004);

  // 50 seeded 4x4 problems, R = 3: constant maps plus 1000 random maps
  for (int trial = 0; trial < 50; ++trial) {
    const Image x = random_image(rng(), 4, 4, 1);
    std::vector<Plane> planes;
    for (int r = 0; r < 3; ++r) planes.push_back(random_image(rng(), 4, 4, 1).plane(0));
    const DeconvolvedClassImages nu = fabricate_nu(planes);
    const double best =
        assembled_sq_error(nu, oracle_assign(nu, x).indices, x.plane(0));

    for (int k = 1; k <= 3; ++k)
      crit.require(best <= assembled_sq_error(
                               nu, Eigen::ArrayXXi::Constant(4, 4, k), x.plane(0)) +
                               1e-12);
    for (int m = 0; m < 1000; ++m) {
      Eigen::ArrayXXi idx(4, 4);
      for (int p = 0; p < 16; ++p) idx(p / 4, p % 4) = static_cast<int>(rng() % 3) + 1;
      crit.require(best <= assembled_sq_error(nu, idx, x.plane(0)) + 1e-12);
    }
  }

  // exhaustive check on 2x2 images (3^4 = 81 maps)
  for (int trial = 0; trial < 50; ++trial) {
    const Image x = random_image(rng(), 2, 2, 1);
    std::vector<Plane> planes;
    for (int r = 0; r < 3; ++r) planes.push_back(random_image(rng(), 2, 2, 1).plane(0));
    const DeconvolvedClassImages nu = fabricate_nu(planes);
    const double best =
        assembled_sq_error(nu, oracle_assign(nu, x).indices, x.plane(0));
    for (int m = 0; m < 81; ++m) {
      Eigen::ArrayXXi idx(2, 2);
      int v = m;
      for (int p = 0; p < 4; ++p) {
        idx(p / 2, p % 2) = v % 3 + 1;
        v /= 3;
      }
      crit.require(best <= assembled_sq_error(nu, idx, x.plane(0)) + 1e-12);
    }
  }
  crit.require(crit.elapsed() < 60.0);
  CHECK(crit.ok());
}

TEST_CASE("5: alternating fit is monotone and recovers the blur kernels") {
  Criterion crit(5, "fit on 16 two-kernel images: monotone loss, taps within 1e-2");

  const int side = 7;
  const Kernel truth_a = linear_motion_kernel({5.0, 0.0, 0, 0.0}, side);
  const Kernel truth_b = linear_motion_kernel({5.0, std::numbers::pi / 2.0, 0, 0.0},
                                              side);
  std::vector<std::pair<Image, Image>> pairs;
  std::mt19937_64 rng(1005);
  for (int i = 0; i < 16; ++i) {
    const Image x = procedural_sharp_image(rng(), 64, 64, 1);
    pairs.emplace_back(x,
                       apply_uniform_blur(x, i % 2 ? truth_b : truth_a, 0.0));
  }

  // start from the truth contaminated by a delta component
  auto perturb = [&](const Kernel& k) {
    Eigen::ArrayXXd taps = 0.85 * k.taps;
    taps(side / 2, side / 2) += 0.15;
    return project_to_valid(std::move(taps));
  };
  FitOptions opt;
  opt.class_count = 2;
  opt.kernel_side = side;
  opt.alternations = 30;
  opt.grad_steps = 20;
  opt.initial_kernels = BasisKernelSet{{perturb(truth_a), perturb(truth_b)}};

  const FitResult res = fit_basis_kernels(pairs, opt);

  for (size_t i = 1; i < res.report.loss_at_assign.size(); ++i)
    crit.require(res.report.loss_at_assign[i] <=
                 res.report.loss_at_assign[i - 1] + 1e-9);

  auto tap_err = [](const Kernel& a, const Kernel& b) {
    return (a.taps - b.taps).abs().maxCoeff();
  };
  const double direct = std::max(tap_err(res.kernels.kernels[0], truth_a),
                                 tap_err(res.kernels.kernels[1], truth_b));
  const double swapped = std::max(tap_err(res.kernels.kernels[0], truth_b),
                                  tap_err(res.kernels.kernels[1], truth_a));
  crit.require(std::min(direct, swapped) < 1e-2);
  crit.require(crit.elapsed() < 300.0);
  CHECK(crit.ok());
}

TEST_CASE("6: more blur classes help, nested bases never hurt") {
  Criterion crit(6, "R=8 beats R=1 by >= 0.3 dB; assembled PSNR monotone in R");
  TempDir dir("accept6");

  SynthConfig cfg;
  cfg.count = 32;
  cfg.height = cfg.width = 64;
  cfg.channels = 1;
  cfg.mode = "two_region";
  cfg.kernel_size = 31;
  // region kernels drawn from the spread basis: identity and 5-pixel motion
  cfg.kernels = {{1.0, 0.0, 0, 0.0}, {5.0, 0.0, 0, 0.0}};
  cfg.seed = 601;
  cfg.output_dir = dir.str() + "/train";
  const DatasetManifest train = make_dataset(cfg);
  cfg.seed = 602;
  cfg.output_dir = dir.str() + "/test";
  const DatasetManifest test = make_dataset(cfg);

  double psnr_r1 = 0.0, psnr_r8 = 0.0;
  std::vector<std::vector<double>> assembled(test.entries.size());
  const int nested[] = {1, 2, 4, 8};
  for (int R : nested) {
    PipelineParams params;
    params.class_count = R;
    params.kernel_source = "motion";
    params.kernel_side = 31;
    const PipelineResult res = run_pipeline(train, test, params);
    if (R == 1) psnr_r1 = res.mean_psnr;
    if (R == 8) psnr_r8 = res.mean_psnr;

    // oracle-assembled quality per held-out image for the nested check
    const BasisKernelSet basis = motion_init_basis(R, 31);
    for (size_t i = 0; i < test.entries.size(); ++i) {
      const Image blur = load_image(test.entries[i].blur_path);
      const Image sharp = load_image(test.entries[i].sharp_path);
      LogKernelSet K(basis, blur.height(), blur.width());
      const DeconvolvedClassImages nu = deconvolve_class_images(blur, K);
      const Image xt = assemble(nu, oracle_assign(nu, sharp));
      assembled[i].push_back(psnr(xt, sharp));
    }
  }

  crit.require(psnr_r8 - psnr_r1 >= 0.3);
  for (const std::vector<double>& per_image : assembled)
    for (size_t j = 1; j < per_image.size(); ++j)
      crit.require(per_image[j] >= per_image[j - 1] - 1e-9);
  crit.require(crit.elapsed() < 600.0);
  CHECK(crit.ok());
}

TEST_CASE("7: filter regression residual bound; zero bank is the identity") {
  Criterion crit(7, "normal-equation residual < 1e-6 relative; zero bank keeps y");
  std::mt19937_64 rng(1007);
  const Image y = random_image(rng(), 32, 32, 3);
  const Image x = random_image(rng(), 32, 32, 3);
  BlurSegmentationMap rho;
  rho.indices.resize(32, 32);
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c) rho.indices(r, c) = static_cast<int>(rng() % 2) + 1;

  DesignAccumulator acc(5, 2, 3);
  collect_design(y, x, rho, &acc);
  const double ridge = 1e-3;
  const FilterBank fb = fit_class_filters(acc, ridge);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) {
      const auto ri = static_cast<size_t>(r);
      const auto ci = static_cast<size_t>(c);
      Eigen::VectorXd w(26);
      w.head(25) = fb.weights[ri][ci];
      w(25) = fb.bias[ri][ci];
      Eigen::MatrixXd A = acc.xtx[ri][ci];
      A.diagonal().array() += ridge;
      const Eigen::VectorXd b = acc.xty[ri][ci];
      crit.require((A * w - b).lpNorm<Eigen::Infinity>() <=
                   1e-6 * b.lpNorm<Eigen::Infinity>());
    }

  FilterBank zero;
  zero.patch_side = 5;
  zero.class_count = 2;
  zero.channels = 3;
  zero.weights.assign(2, std::vector<Eigen::VectorXd>(3, Eigen::VectorXd::Zero(25)));
  zero.bias.assign(2, std::vector<double>(3, 0.0));
  const Image rec = reconstruct(y, predict_residual(y, rho, zero));
  for (int c = 0; c < 3; ++c)
    crit.require((rec.plane(c) == y.plane(c)).all());
  CHECK(crit.ok());
}

TEST_CASE("8: metric oracles") {
  Criterion crit(8, "psnr closed forms; ssim vs direct formula; ssim(x,x)=1");
  const Image base = random_image(1008, 16, 16, 1);
  Image off = base;
  off.plane(0) += 0.1f;
  // float pixel storage rounds the constant offsets, moving the psnr by a
  // few 1e-6 dB; 1e-4 dB still rules out any formula error
  crit.require(std::abs(psnr(base, off) - 20.0) < 1e-4);
  Image off2 = base;
  off2.plane(0) += 0.01f;
  crit.require(std::abs(psnr(base, off2) - 40.0) < 1e-4);
  crit.require(psnr(base, base) == kPsnrCap);

  const SsimOptions opt;
  std::mt19937_64 rng(1008);
  for (int i = 0; i < 20; ++i) {
    const Image a = random_image(rng(), 14, 18, 1);
    Image b = a;
    b.plane(0) = 0.6f * b.plane(0) + 0.4f * random_image(rng(), 14, 18, 1).plane(0);

    // direct windowed formula, written independently of the library sweep
    Eigen::ArrayXXd win(11, 11);
    for (int r = 0; r < 11; ++r)
      for (int c = 0; c < 11; ++c)
        win(r, c) = std::exp(-((r - 5.0) * (r - 5.0) + (c - 5.0) * (c - 5.0)) /
                             (2.0 * opt.sigma * opt.sigma));
    win /= win.sum();
    double acc = 0.0;
    long count = 0;
    for (int r = 0; r + 11 <= 14; ++r)
      for (int c = 0; c + 11 <= 18; ++c, ++count) {
        double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
        for (int i2 = 0; i2 < 11; ++i2)
          for (int j = 0; j < 11; ++j) {
            const double va = a.plane(0)(r + i2, c + j);
            const double vb = b.plane(0)(r + i2, c + j);
            mu_a += win(i2, j) * va;
            mu_b += win(i2, j) * vb;
            aa += win(i2, j) * va * va;
            bb += win(i2, j) * vb * vb;
            ab += win(i2, j) * va * vb;
          }
        acc += ((2 * mu_a * mu_b + opt.c1) * (2 * (ab - mu_a * mu_b) + opt.c2)) /
               ((mu_a * mu_a + mu_b * mu_b + opt.c1) *
                ((aa - mu_a * mu_a) + (bb - mu_b * mu_b) + opt.c2));
      }
    crit.require(std::abs(ssim(a, b, opt) - acc / static_cast<double>(count)) < 1e-6);
  }
  const Image self = random_image(42, 12, 12, 3);
  crit.require(std::abs(ssim(self, self) - 1.0) < 1e-12);
  CHECK(crit.ok());
}

TEST_CASE("9: the ablation sweep is byte-identical across reruns") {
  Criterion crit(9, "two seeded sweep runs produce identical tables and kernels");
  TempDir dir("accept9");

  SynthConfig ds;
  ds.output_dir = dir.str() + "/ds";
  ds.count = 4;
  ds.height = ds.width = 32;
  ds.channels = 1;
  ds.seed = 901;
  ds.kernels = {{1.0, 0.0, 0, 0.0}, {3.0, 0.0, 0, 0.0}};
  make_dataset(ds);

  auto run_sweep = [&](const std::string& out_dir) {
    nlohmann::json cfg{{"train_manifest", ds.output_dir + "/manifest.jsonl"},
                       {"output_dir", out_dir},
                       {"R_list", {1, 2}},
                       {"lambda_list", {1.0}},
                       {"kernel_side", 5},
                       {"alternations", 2},
                       {"grad_steps", 2},
                       {"seed", 7},
                       {"large_fraction", 0.5}};
    const std::string cfg_path = out_dir + "_config.json";
    std::ofstream(cfg_path) << cfg.dump(2) << "\n";
    const std::string cmd = std::string(BLURSEG_CLI_PATH) + " sweep --config " +
                            cfg_path + " > /dev/null";
    REQUIRE(std::system(cmd.c_str()) == 0);
  };
  run_sweep(dir.str() + "/out_a");
  run_sweep(dir.str() + "/out_b");

  const char* files[] = {"records.json", "records.csv", "run.json",
                         "kernels_R2_lambda1_00.txt", "kernels_R2_lambda1_01.txt"};
  for (const char* f : files)
    crit.require(slurp(dir.str() + "/out_a/" + f) ==
                 slurp(dir.str() + "/out_b/" + f));
  CHECK(crit.ok());
}

TEST_CASE("10: one-hot hardening semantics") {
  Criterion crit(10, "[0.5,0.2,0.2,0.1] hardens to class 1; idempotent on 1000 maps");
  BlurSegmentationMap worked;
  for (float p : {0.5f, 0.2f, 0.2f, 0.1f})
    worked.soft.push_back(Plane::Constant(1, 1, p));
  crit.require(soft_to_onehot(worked).indices(0, 0) == 1);

  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  for (int trial = 0; trial < 1000; ++trial) {
    BlurSegmentationMap m;
    const int R = 2 + static_cast<int>(rng() % 7);
    Plane total = Plane::Zero(4, 4);
    std::vector<Plane> raw(static_cast<size_t>(R), Plane(4, 4));
    for (auto& p : raw) {
      for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) p(r, c) = unit(rng) + 1e-4f;
      total += p;
    }
    for (auto& p : raw) m.soft.push_back(p / total);

    const BlurSegmentationMap hard = soft_to_onehot(m);
    const BlurSegmentationMap twice = soft_to_onehot(hard);
    crit.require((hard.indices == twice.indices).all());
    for (size_t r = 0; r < hard.soft.size(); ++r)
      crit.require((hard.soft[r] - twice.soft[r]).abs().maxCoeff() == 0.0f);
  }
  CHECK(crit.ok());
}
