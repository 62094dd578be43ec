#include "blurseg/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace blurseg {

namespace fs = std::filesystem;

Image colorize_segmentation(const BlurSegmentationMap& rho, int class_count) {
  if (class_count < 1 || class_count > 32)
    throw std::invalid_argument("colorize_segmentation: need 1 <= R <= 32");
  if ((rho.indices < 1).any() || (rho.indices > class_count).any())
    throw std::invalid_argument("colorize_segmentation: index out of range");

  const auto& palette = segmentation_palette();
  Image img(rho.rows(), rho.cols(), 3);
  for (int col = 0; col < rho.cols(); ++col)
    for (int row = 0; row < rho.rows(); ++row) {
      const auto& rgb = palette[static_cast<size_t>(rho.indices(row, col))];
      for (int c = 0; c < 3; ++c)
        img.plane(c)(row, col) = static_cast<float>(rgb[static_cast<size_t>(c)]) / 255.0f;
    }
  return img;
}

BlurSegmentationMap decolorize_segmentation(const Image& img, int class_count) {
  if (img.channels() != 3)
    throw std::invalid_argument("decolorize_segmentation: need 3 channels");
  const auto& palette = segmentation_palette();
  BlurSegmentationMap map;
  map.indices.resize(img.height(), img.width());
  for (int col = 0; col < img.width(); ++col)
    for (int row = 0; row < img.height(); ++row) {
      int found = 0;
      for (int k = 1; k <= class_count; ++k) {
        bool match = true;
        for (int c = 0; c < 3; ++c) {
          const int v = static_cast<int>(std::lround(img.plane(c)(row, col) * 255.0f));
          if (v != palette[static_cast<size_t>(k)][static_cast<size_t>(c)]) {
            match = false;
            break;
          }
        }
        if (match) {
          found = k;
          break;
        }
      }
      if (found == 0)
        throw std::runtime_error("decolorize_segmentation: unknown color");
      map.indices(row, col) = found;
    }
  return map;
}

nlohmann::json PipelineParams::fingerprint() const {
  return {{"R", class_count},       {"lambda", lambda},
          {"eps", eps_rel},         {"P", patch_side},
          {"ridge", ridge},         {"kernel_side", kernel_side},
          {"alternations", alternations}, {"grad_steps", grad_steps},
          {"seed", seed},           {"kernel_source", kernel_source}};
}

PipelineResult run_pipeline(const DatasetManifest& train,
                            const DatasetManifest& test,
                            const PipelineParams& params) {
  PipelineResult result;

  if (params.kernel_source == "motion") {
    result.kernels = motion_init_basis(params.class_count, params.kernel_side);
  } else {
    FitOptions opt;
    opt.class_count = params.class_count;
    opt.lambda = params.lambda;
    opt.alternations = params.alternations;
    opt.grad_steps = params.grad_steps;
    opt.step = params.step;
    opt.kernel_side = params.kernel_side;
    opt.eps_rel = params.eps_rel;
    opt.seed = params.seed;
    result.kernels = fit_basis_kernels(train, opt).kernels;
  }

  // oracle maps on the training set, then the closed-form D2C fit
  std::vector<BlurSegmentationMap> train_maps;
  for (const ManifestEntry& e : train.entries) {
    const Image blur = load_image(e.blur_path);
    const Image sharp = load_image(e.sharp_path);
    LogKernelSet K(result.kernels, blur.height(), blur.width(), params.eps_rel);
    train_maps.push_back(oracle_assign(deconvolve_class_images(blur, K), sharp));
  }
  const DesignAccumulator acc =
      collect_design(train, train_maps, params.class_count, params.patch_side);
  const FilterBank bank = fit_class_filters(acc, params.ridge);

  const std::vector<bool> large = large_motion_subset(test, params.large_fraction);
  double sum_psnr = 0.0, sum_ssim = 0.0, sum_psnr_large = 0.0;
  long n_large = 0;
  for (size_t i = 0; i < test.entries.size(); ++i) {
    const Image blur = load_image(test.entries[i].blur_path);
    const Image sharp = load_image(test.entries[i].sharp_path);
    LogKernelSet K(result.kernels, blur.height(), blur.width(), params.eps_rel);
    const BlurSegmentationMap rho =
        oracle_assign(deconvolve_class_images(blur, K), sharp);
    const Image xhat = reconstruct(blur, predict_residual(blur, rho, bank));

    EvalRecord rec;
    std::ostringstream id;
    id.width(4);
    id.fill('0');
    id << i;
    rec.pair_id = id.str();
    rec.psnr_db = psnr(xhat, sharp);
    rec.ssim_score = ssim(xhat, sharp);
    rec.tags.push_back("total");
    if (large[i]) {
      rec.tags.push_back("large");
      sum_psnr_large += rec.psnr_db;
      ++n_large;
    }
    rec.fingerprint = params.fingerprint();
    sum_psnr += rec.psnr_db;
    sum_ssim += rec.ssim_score;
    result.records.push_back(std::move(rec));
  }
  const double n = static_cast<double>(std::max<size_t>(1, test.entries.size()));
  result.mean_psnr = sum_psnr / n;
  result.mean_ssim = sum_ssim / n;
  result.mean_psnr_large = n_large ? sum_psnr_large / n_large : 0.0;
  std::sort(result.records.begin(), result.records.end(),
            [](const EvalRecord& a, const EvalRecord& b) {
              return a.pair_id < b.pair_id;
            });
  return result;
}

SweepConfig sweep_config_from_json(const nlohmann::json& j) {
  SweepConfig cfg;
  cfg.train_manifest = j.at("train_manifest");
  cfg.test_manifest = j.value("test_manifest", cfg.train_manifest);
  cfg.output_dir = j.at("output_dir");
  if (j.contains("R_list")) cfg.class_counts = j["R_list"].get<std::vector<int>>();
  if (j.contains("lambda_list"))
    cfg.lambdas = j["lambda_list"].get<std::vector<double>>();
  PipelineParams& p = cfg.base;
  p.eps_rel = j.value("eps", p.eps_rel);
  p.patch_side = j.value("patch_side", p.patch_side);
  p.ridge = j.value("ridge", p.ridge);
  p.kernel_side = j.value("kernel_side", p.kernel_side);
  p.alternations = j.value("alternations", p.alternations);
  p.grad_steps = j.value("grad_steps", p.grad_steps);
  p.step = j.value("step", p.step);
  p.seed = j.value("seed", p.seed);
  p.kernel_source = j.value("kernel_source", p.kernel_source);
  p.large_fraction = j.value("large_fraction", p.large_fraction);
  return cfg;
}

nlohmann::json records_to_json(const std::vector<EvalRecord>& records) {
  nlohmann::json out = nlohmann::json::array();
  for (const EvalRecord& r : records)
    out.push_back({{"pair_id", r.pair_id},
                   {"psnr", r.psnr_db},
                   {"ssim", r.ssim_score},
                   {"tags", r.tags},
                   {"fingerprint", r.fingerprint}});
  return out;
}

std::string records_to_csv(const std::vector<EvalRecord>& records) {
  std::ostringstream os;
  os.precision(12);
  os << "pair_id,psnr,ssim,tags,R,lambda\n";
  for (const EvalRecord& r : records) {
    os << r.pair_id << "," << r.psnr_db << "," << r.ssim_score << ",";
    for (size_t t = 0; t < r.tags.size(); ++t) os << (t ? ";" : "") << r.tags[t];
    os << "," << r.fingerprint.value("R", 0) << ","
       << r.fingerprint.value("lambda", 0.0) << "\n";
  }
  return os.str();
}

std::vector<EvalRecord> ablation_sweep(const SweepConfig& cfg) {
  const DatasetManifest train = load_manifest(cfg.train_manifest);
  const DatasetManifest test = load_manifest(cfg.test_manifest);
  fs::create_directories(cfg.output_dir);

  std::vector<EvalRecord> all;
  nlohmann::json runs = nlohmann::json::array();
  for (int R : cfg.class_counts) {
    for (double lambda : cfg.lambdas) {
      PipelineParams params = cfg.base;
      params.class_count = R;
      params.lambda = lambda;
      const PipelineResult res = run_pipeline(train, test, params);

      std::ostringstream tag;
      tag << "R" << R << "_lambda" << lambda;
      save_kernel_set(res.kernels, cfg.output_dir, "kernels_" + tag.str());
      runs.push_back({{"config", params.fingerprint()},
                      {"mean_psnr", res.mean_psnr},
                      {"mean_ssim", res.mean_ssim},
                      {"mean_psnr_large", res.mean_psnr_large}});
      for (EvalRecord rec : res.records) {
        rec.pair_id = tag.str() + "/" + rec.pair_id;
        all.push_back(std::move(rec));
      }
    }
  }
  std::sort(all.begin(), all.end(), [](const EvalRecord& a, const EvalRecord& b) {
    return a.pair_id < b.pair_id;
  });

  {
    std::ofstream out(fs::path(cfg.output_dir) / "records.json");
    out << records_to_json(all).dump(2) << "\n";
  }
  {
    std::ofstream out(fs::path(cfg.output_dir) / "records.csv");
    out << records_to_csv(all);
  }
  {
    nlohmann::json run{{"train_manifest", cfg.train_manifest},
                       {"test_manifest", cfg.test_manifest},
                       {"R_list", cfg.class_counts},
                       {"lambda_list", cfg.lambdas},
                       {"base", cfg.base.fingerprint()},
                       {"runs", runs}};
    std::ofstream out(fs::path(cfg.output_dir) / "run.json");
    out << run.dump(2) << "\n";
  }
  return all;
}

}  // namespace blurseg
