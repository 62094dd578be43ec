#include "blurseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace blurseg {

double psnr(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("psnr: shape mismatch");
  double sq = 0.0;
  for (int c = 0; c < a.channels(); ++c)
    sq += (a.plane(c).cast<double>() - b.plane(c).cast<double>()).square().sum();
  const double mse =
      sq / (static_cast<double>(a.height()) * a.width() * a.channels());
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

namespace {

Eigen::ArrayXXd gaussian_window(int n, double sigma) {
  Eigen::ArrayXd g(n);
  const double mid = (n - 1) / 2.0;
  for (int i = 0; i < n; ++i)
    g(i) = std::exp(-0.5 * std::pow((i - mid) / sigma, 2.0));
  Eigen::ArrayXXd w = g.matrix() * g.matrix().transpose();
  return w / w.sum();
}

}  // namespace

double ssim(const Image& a, const Image& b, const SsimOptions& opt) {
  if (!a.same_shape(b)) throw std::invalid_argument("ssim: shape mismatch");
  const int h = a.height(), w = a.width(), n = opt.window;
  if (h < n || w < n)
    throw std::invalid_argument("ssim: image smaller than window");

  const Eigen::ArrayXXd win = gaussian_window(n, opt.sigma);
  double channel_sum = 0.0;
  for (int c = 0; c < a.channels(); ++c) {
    const Eigen::ArrayXXd pa = a.plane(c).cast<double>();
    const Eigen::ArrayXXd pb = b.plane(c).cast<double>();
    double acc = 0.0;
    long count = 0;
    for (int r = 0; r + n <= h; ++r) {
      for (int col = 0; col + n <= w; ++col) {
        const auto wa = pa.block(r, col, n, n);
        const auto wb = pb.block(r, col, n, n);
        const double mu_a = (win * wa).sum();
        const double mu_b = (win * wb).sum();
        const double var_a = (win * wa.square()).sum() - mu_a * mu_a;
        const double var_b = (win * wb.square()).sum() - mu_b * mu_b;
        const double cov = (win * wa * wb).sum() - mu_a * mu_b;
        acc += ((2.0 * mu_a * mu_b + opt.c1) * (2.0 * cov + opt.c2)) /
               ((mu_a * mu_a + mu_b * mu_b + opt.c1) * (var_a + var_b + opt.c2));
        ++count;
      }
    }
    channel_sum += acc / static_cast<double>(count);
  }
  return channel_sum / a.channels();
}

std::vector<bool> large_motion_subset(const DatasetManifest& manifest,
                                      double fraction) {
  const size_t n = manifest.entries.size();
  if (n == 0) throw std::invalid_argument("large_motion_subset: empty manifest");
  if (fraction < 0.0 || fraction > 1.0)
    throw std::invalid_argument("large_motion_subset: fraction out of range");

  std::vector<double> score(n);
  for (size_t i = 0; i < n; ++i) {
    const Image blur = load_image(manifest.entries[i].blur_path);
    const Image sharp = load_image(manifest.entries[i].sharp_path);
    score[i] = (luma(sharp) - luma(blur)).abs().mean();
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&score](size_t a, size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return a < b;
  });
  const size_t take =
      std::min(n, static_cast<size_t>(std::lround(fraction * static_cast<double>(n))));
  std::vector<bool> large(n, false);
  for (size_t i = 0; i < take; ++i) large[order[i]] = true;
  return large;
}

const std::array<std::array<uint8_t, 3>, 33>& segmentation_palette() {
  static const std::array<std::array<uint8_t, 3>, 33> palette = {{
      {0, 0, 0},        // unused; classes are 1-based
      {230, 25, 75},    {60, 180, 75},   {255, 225, 25}, {0, 130, 200},
      {245, 130, 48},   {145, 30, 180},  {70, 240, 240}, {240, 50, 230},
      {210, 245, 60},   {250, 190, 212}, {0, 128, 128},  {220, 190, 255},
      {170, 110, 40},   {255, 250, 200}, {128, 0, 0},    {170, 255, 195},
      {128, 128, 0},    {255, 215, 180}, {0, 0, 128},    {128, 128, 128},
      {255, 255, 255},  {30, 30, 30},    {200, 60, 60},  {60, 60, 200},
      {60, 200, 200},   {200, 200, 60},  {200, 60, 200}, {100, 160, 60},
      {60, 100, 160},   {160, 60, 100},  {90, 220, 120}, {220, 120, 90},
  }};
  return palette;
}

}  // namespace blurseg
