#ifndef BLURSEG_PIPELINE_HPP
#define BLURSEG_PIPELINE_HPP

#include "blurseg/d2c.hpp"
#include "blurseg/discretize.hpp"
#include "blurseg/metrics.hpp"

#include <string>
#include <vector>

namespace blurseg {

/// Fixed-palette class-map rendering. Injective for class_count <= 32 so
/// maps can be recovered from the render.
Image colorize_segmentation(const BlurSegmentationMap& rho, int class_count);
BlurSegmentationMap decolorize_segmentation(const Image& img, int class_count);

struct PipelineParams {
  int class_count = 8;
  double lambda = 1.0;
  double eps_rel = kDefaultEpsRel;
  int patch_side = 7;
  double ridge = 1e-3;
  int kernel_side = 31;
  int alternations = 30;
  int grad_steps = 20;
  double step = 0.1;
  uint64_t seed = 0;
  std::string kernel_source = "fit";  // "fit" | "motion" (fixed spread basis)
  double large_fraction = 104.0 / 980.0;

  nlohmann::json fingerprint() const;
};

struct PipelineResult {
  BasisKernelSet kernels;
  std::vector<EvalRecord> records;  // sorted by pair id
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  double mean_psnr_large = 0.0;
};

/// Full pipeline: (optionally) fit basis kernels on the training set,
/// build oracle segmentation maps, fit the D2C filter bank, then deblur and
/// score the test set with oracle maps.
PipelineResult run_pipeline(const DatasetManifest& train,
                            const DatasetManifest& test,
                            const PipelineParams& params);

struct SweepConfig {
  std::string train_manifest;
  std::string test_manifest;
  std::string output_dir;
  std::vector<int> class_counts{8};
  std::vector<double> lambdas{1.0};
  PipelineParams base;
};

SweepConfig sweep_config_from_json(const nlohmann::json& j);

/// Runs the pipeline per (R, lambda) configuration; writes records.json,
/// records.csv, kernel files and run.json under output_dir. Deterministic
/// given the seeds in the config.
std::vector<EvalRecord> ablation_sweep(const SweepConfig& cfg);

nlohmann::json records_to_json(const std::vector<EvalRecord>& records);
std::string records_to_csv(const std::vector<EvalRecord>& records);

}  // namespace blurseg

#endif  // BLURSEG_PIPELINE_HPP
