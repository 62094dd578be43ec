#include "blurseg/synth.hpp"

#include "blurseg/spectral.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>
#include <stdexcept>

namespace blurseg {

namespace fs = std::filesystem;

Kernel linear_motion_kernel(const MotionSpec& spec, int size) {
  if (spec.length < 1.0)
    throw std::invalid_argument("linear_motion_kernel: length must be >= 1");
  if (size < spec.length)
    throw std::invalid_argument("linear_motion_kernel: size < length");
  if (size % 2 == 0)
    throw std::invalid_argument("linear_motion_kernel: size must be odd");

  const double L = spec.length;
  const double dx = std::cos(spec.angle), dy = std::sin(spec.angle);
  const int center = size / 2;

  // 16x supersampling per tap along the segment, nearest-cell binning;
  // the 105 factor makes small integer lengths divide the sample count so
  // uniform lines rasterize exactly
  const long samples = 256L * size * 105L;
  Eigen::ArrayXXd taps = Eigen::ArrayXXd::Zero(size, size);
  for (long j = 0; j < samples; ++j) {
    const double t = (j + 0.5) / static_cast<double>(samples) - 0.5;  // (-0.5, 0.5)
    const double px = t * L * dx, py = t * L * dy;
    const long col = std::lround(px) + center;
    const long row = std::lround(py) + center;
    if (row >= 0 && row < size && col >= 0 && col < size) taps(row, col) += 1.0;
  }
  return project_to_valid(std::move(taps));
}

Kernel random_trajectory_kernel(const MotionSpec& spec, int size) {
  if (spec.trajectory_seed == 0)
    throw std::invalid_argument("random_trajectory_kernel: seed must be nonzero");
  if (size % 2 == 0 || size < spec.length)
    throw std::invalid_argument("random_trajectory_kernel: bad size");

  std::mt19937_64 rng(spec.trajectory_seed);
  std::normal_distribution<double> turn(0.0, 0.6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // confine the walk so nearest-cell binning keeps the support within the
  // stated motion extent
  const double rmax = std::max(0.0, 0.5 * (spec.length - 1.0) - 1e-9);
  const int center = size / 2;
  const int steps = 2048;
  const double step_len = std::max(spec.length, 1.0) / 64.0;

  double x = 0.0, y = 0.0, heading = unit(rng) * 2.0 * M_PI;
  Eigen::ArrayXXd taps = Eigen::ArrayXXd::Zero(size, size);
  for (int j = 0; j < steps; ++j) {
    heading += turn(rng);
    x += step_len * std::cos(heading);
    y += step_len * std::sin(heading);
    const double r = std::hypot(x, y);
    if (r > rmax) {
      const double s = rmax / r;
      x *= s;
      y *= s;
    }
    taps(std::lround(y) + center, std::lround(x) + center) += 1.0;
  }
  return project_to_valid(std::move(taps));
}

namespace {

Image add_noise_and_clamp(Image img, double noise_sigma, uint64_t seed) {
  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> noise(0.0f, static_cast<float>(noise_sigma));
    for (int c = 0; c < img.channels(); ++c) {
      Plane& p = img.plane(c);
      for (Eigen::Index col = 0; col < p.cols(); ++col)
        for (Eigen::Index row = 0; row < p.rows(); ++row) p(row, col) += noise(rng);
    }
  }
  return clamp01(std::move(img));
}

Image periodic_convolve(const Image& x, const Kernel& k) {
  const int h = x.height(), w = x.width();
  const Spectrum ks = kernel_spectrum(k, h, w);
  Image out(h, w, x.channels());
  for (int c = 0; c < x.channels(); ++c) {
    const Spectrum xs = fft2(x.plane(c), h, w);
    out.plane(c) = ifft2(xs * ks).real().cast<float>();
  }
  return out;
}

}  // namespace

Image apply_uniform_blur(const Image& x, const Kernel& k, double noise_sigma,
                         uint64_t noise_seed) {
  if (k.size() > x.height() || k.size() > x.width())
    throw std::invalid_argument("apply_uniform_blur: kernel larger than image");
  return add_noise_and_clamp(periodic_convolve(x, k), noise_sigma, noise_seed);
}

Image apply_nonuniform_blur(const Image& x, const BasisKernelSet& kernels,
                            const RegionMask& mask, int feather,
                            double noise_sigma, uint64_t noise_seed) {
  if (mask.rows() != x.height() || mask.cols() != x.width())
    throw std::invalid_argument("apply_nonuniform_blur: mask dimension mismatch");
  const int R = kernels.count();
  if ((mask < 0).any() || (mask >= R).any())
    throw std::invalid_argument("apply_nonuniform_blur: mask index out of range");

  const int h = x.height(), w = x.width();

  // per-region weights: one-hot maps, box-feathered; feathering preserves
  // the pointwise sum of 1 so no renormalization is needed
  std::vector<Plane> weight(static_cast<size_t>(R), Plane::Zero(h, w));
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) weight[static_cast<size_t>(mask(r, c))](r, c) = 1.0f;
  if (feather > 0) {
    const int win = 2 * feather + 1;
    for (Plane& wgt : weight) {
      Plane tmp = Plane::Zero(h, w);
      for (int r = 0; r < h; ++r)  // horizontal box pass, periodic
        for (int c = 0; c < w; ++c) {
          float acc = 0.0f;
          for (int d = -feather; d <= feather; ++d) acc += wgt(r, ((c + d) % w + w) % w);
          tmp(r, c) = acc / static_cast<float>(win);
        }
      for (int r = 0; r < h; ++r)  // vertical box pass
        for (int c = 0; c < w; ++c) {
          float acc = 0.0f;
          for (int d = -feather; d <= feather; ++d) acc += tmp(((r + d) % h + h) % h, c);
          wgt(r, c) = acc / static_cast<float>(win);
        }
    }
  }

  Image out(h, w, x.channels());
  for (int r = 0; r < R; ++r) {
    const Image blurred = periodic_convolve(x, kernels.kernels[static_cast<size_t>(r)]);
    for (int c = 0; c < x.channels(); ++c)
      out.plane(c) += weight[static_cast<size_t>(r)] * blurred.plane(c);
  }
  return add_noise_and_clamp(std::move(out), noise_sigma, noise_seed);
}

Image procedural_sharp_image(uint64_t seed, int height, int width, int channels) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<float> texture(0.0f, 0.06f);

  Image img(height, width, channels);
  for (int c = 0; c < channels; ++c) img.plane(c).setConstant(0.5f);

  const int shapes = 8;
  for (int s = 0; s < shapes; ++s) {
    const int r0 = static_cast<int>(unit(rng) * height);
    const int c0 = static_cast<int>(unit(rng) * width);
    const int rh = 2 + static_cast<int>(unit(rng) * height / 2);
    const int cw = 2 + static_cast<int>(unit(rng) * width / 2);
    std::vector<float> fill(static_cast<size_t>(channels));
    for (float& f : fill) f = static_cast<float>(unit(rng));
    for (int r = r0; r < std::min(height, r0 + rh); ++r)
      for (int c = c0; c < std::min(width, c0 + cw); ++c)
        for (int ch = 0; ch < channels; ++ch)
          img.plane(ch)(r, c) = fill[static_cast<size_t>(ch)];
  }
  for (int ch = 0; ch < channels; ++ch) {
    Plane& p = img.plane(ch);
    for (Eigen::Index col = 0; col < p.cols(); ++col)
      for (Eigen::Index row = 0; row < p.rows(); ++row) p(row, col) += texture(rng);
  }
  return clamp01(std::move(img));
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig cfg;
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  cfg.count = j.value("count", cfg.count);
  cfg.height = j.value("height", cfg.height);
  cfg.width = j.value("width", cfg.width);
  cfg.channels = j.value("channels", cfg.channels);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
  cfg.feather = j.value("feather", cfg.feather);
  cfg.mode = j.value("mode", cfg.mode);
  cfg.kernel_size = j.value("kernel_size", cfg.kernel_size);
  cfg.sharp_dir = j.value("sharp_dir", cfg.sharp_dir);
  cfg.image_format = j.value("image_format", cfg.image_format);
  if (j.contains("kernels")) {
    for (const auto& kj : j["kernels"]) {
      MotionSpec ms;
      ms.length = kj.value("length", 1.0);
      ms.angle = kj.value("angle", 0.0);
      ms.trajectory_seed = kj.value("trajectory_seed", uint64_t{0});
      cfg.kernels.push_back(ms);
    }
  }
  return cfg;
}

nlohmann::json synth_config_to_json(const SynthConfig& cfg) {
  nlohmann::json kernels = nlohmann::json::array();
  for (const MotionSpec& ms : cfg.kernels)
    kernels.push_back({{"length", ms.length},
                       {"angle", ms.angle},
                       {"trajectory_seed", ms.trajectory_seed}});
  return {{"output_dir", cfg.output_dir}, {"count", cfg.count},
          {"height", cfg.height},         {"width", cfg.width},
          {"channels", cfg.channels},     {"seed", cfg.seed},
          {"noise_sigma", cfg.noise_sigma}, {"feather", cfg.feather},
          {"mode", cfg.mode},             {"kernel_size", cfg.kernel_size},
          {"sharp_dir", cfg.sharp_dir},   {"image_format", cfg.image_format},
          {"kernels", kernels}};
}

namespace {

std::string zero_pad(int v, int width = 3) {
  std::ostringstream os;
  os.width(width);
  os.fill('0');
  os << v;
  return os.str();
}

void save_mask_png(const RegionMask& mask, const std::string& path) {
  Image img(static_cast<int>(mask.rows()), static_cast<int>(mask.cols()), 1);
  img.plane(0) = mask.cast<float>() / 255.0f;
  save_image(img, path);
}

}  // namespace

DatasetManifest make_dataset(const SynthConfig& cfg) {
  if (cfg.count < 1) throw std::invalid_argument("make_dataset: count < 1");
  if (cfg.kernels.empty())
    throw std::invalid_argument("make_dataset: no kernel specs");
  if (cfg.output_dir.empty())
    throw std::invalid_argument("make_dataset: output_dir required");
  fs::create_directories(cfg.output_dir);

  int side = cfg.kernel_size;
  if (side == 0) {
    double max_len = 1.0;
    for (const MotionSpec& ms : cfg.kernels) max_len = std::max(max_len, ms.length);
    side = static_cast<int>(std::ceil(max_len));
    if (side % 2 == 0) ++side;
  }

  BasisKernelSet set;
  for (const MotionSpec& ms : cfg.kernels)
    set.kernels.push_back(ms.trajectory_seed == 0
                              ? linear_motion_kernel(ms, side)
                              : random_trajectory_kernel(ms, side));
  std::vector<std::string> kernel_paths;
  save_kernel_set(set, cfg.output_dir, "kernel", &kernel_paths);

  std::vector<std::string> sharp_sources;
  if (!cfg.sharp_dir.empty()) {
    for (const auto& e : fs::directory_iterator(cfg.sharp_dir))
      if (e.is_regular_file()) sharp_sources.push_back(e.path().string());
    std::sort(sharp_sources.begin(), sharp_sources.end());
    if (sharp_sources.empty())
      throw std::runtime_error("make_dataset: no sharp images in " + cfg.sharp_dir);
  }

  const std::string ext = cfg.image_format == "png16" ? ".png" : ".pfm";
  const int K = static_cast<int>(cfg.kernels.size());

  DatasetManifest manifest;
  for (int i = 0; i < cfg.count; ++i) {
    std::seed_seq seq{cfg.seed, static_cast<uint64_t>(i)};
    std::mt19937_64 rng(seq);
    const uint64_t sharp_seed = rng(), noise_seed = rng(), split_draw = rng();

    Image sharp =
        sharp_sources.empty()
            ? procedural_sharp_image(sharp_seed, cfg.height, cfg.width, cfg.channels)
            : load_image(sharp_sources[static_cast<size_t>(i) % sharp_sources.size()]);

    ManifestEntry entry;
    Image blur;
    if (cfg.mode == "uniform") {
      const int kid = i % K;
      blur = apply_uniform_blur(sharp, set.kernels[static_cast<size_t>(kid)],
                                cfg.noise_sigma, noise_seed);
      entry.ground_truth_kernel_ids = {kid};
    } else if (cfg.mode == "two_region") {
      const int ka = (2 * i) % K, kb = (2 * i + 1) % K;
      const int h = sharp.height(), w = sharp.width();
      RegionMask mask(h, w);
      const bool vertical = (split_draw & 1) == 0;
      const int lo = vertical ? w / 4 : h / 4;
      const int span = vertical ? w / 2 : h / 2;
      const int split = lo + static_cast<int>((split_draw >> 1) % std::max(1, span));
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
          mask(r, c) = (vertical ? c : r) < split ? 0 : 1;
      BasisKernelSet pair_set;
      pair_set.kernels = {set.kernels[static_cast<size_t>(ka)],
                          set.kernels[static_cast<size_t>(kb)]};
      blur = apply_nonuniform_blur(sharp, pair_set, mask, cfg.feather,
                                   cfg.noise_sigma, noise_seed);
      entry.ground_truth_kernel_ids = {ka, kb};
      entry.region_mask_path = "mask_" + zero_pad(i) + ".png";
      save_mask_png(mask, (fs::path(cfg.output_dir) / entry.region_mask_path).string());
    } else {
      throw std::invalid_argument("make_dataset: unknown mode " + cfg.mode);
    }

    entry.sharp_path = "sharp_" + zero_pad(i) + ext;
    entry.blur_path = "blur_" + zero_pad(i) + ext;
    auto save = [&cfg](const Image& img, const std::string& rel) {
      const std::string full = (fs::path(cfg.output_dir) / rel).string();
      if (cfg.image_format == "png16")
        save_png16(img, full);
      else
        save_image(img, full);
    };
    save(sharp, entry.sharp_path);
    save(blur, entry.blur_path);
    manifest.entries.push_back(std::move(entry));
  }

  nlohmann::json kernel_rel = nlohmann::json::array();
  for (const std::string& p : kernel_paths)
    kernel_rel.push_back(fs::path(p).filename().string());
  manifest.metadata = {{"seed", cfg.seed},
                       {"kernel_params", synth_config_to_json(cfg)["kernels"]},
                       {"kernel_paths", kernel_rel},
                       {"kernel_size", side}};

  const std::string manifest_path =
      (fs::path(cfg.output_dir) / "manifest.jsonl").string();
  save_manifest(manifest, manifest_path);
  return load_manifest(manifest_path);
}

}  // namespace blurseg
