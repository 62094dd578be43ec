// blurseg: blur pixel discretization toolkit CLI.
#include "blurseg/d2c.hpp"
#include "blurseg/discretize.hpp"
#include "blurseg/pipeline.hpp"
#include "blurseg/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace blurseg;

namespace {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

std::string pad3(size_t i) {
  std::ostringstream os;
  os.width(3);
  os.fill('0');
  os << i;
  return os.str();
}

BasisKernelSet load_kernel_dir(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".txt") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no kernel files in " + dir);
  BasisKernelSet set;
  for (const std::string& f : files) set.kernels.push_back(load_kernel(f));
  set.validate();
  return set;
}

void write_run_fingerprint(const std::string& dir, const nlohmann::json& fp) {
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / "run.json");
  out << fp.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blur pixel discretization toolkit"};
  app.require_subcommand(1);

  std::string config_path, manifest_path, out_dir, kernels_dir, maps_dir,
      filters_path, pred_dir, map_path;
  int R = 8, alternations = 30, grad_steps = 20, kernel_side = 31, patch_side = 7;
  double lambda = 1.0, eps_rel = kDefaultEpsRel, ridge = 1e-3, step = 0.1;
  double large_fraction = 104.0 / 980.0;
  uint64_t seed = 0;

  auto* synth = app.add_subcommand("synth", "generate a synthetic blur dataset");
  synth->add_option("--config", config_path, "synth config json")->required();
  synth->add_option("--seed", seed, "override config seed");
  synth->add_option("--out", out_dir, "override output_dir");

  auto* discretize =
      app.add_subcommand("discretize", "emit class images, maps and assemblies");
  discretize->add_option("--manifest", manifest_path)->required();
  discretize->add_option("--kernels", kernels_dir, "directory of kernel .txt files")
      ->required();
  discretize->add_option("--out", out_dir)->required();
  discretize->add_option("--eps", eps_rel, "spectral clamp, relative to peak");

  auto* fit = app.add_subcommand("fit-kernels", "alternating basis-kernel fit");
  fit->add_option("--manifest", manifest_path)->required();
  fit->add_option("--out", out_dir)->required();
  fit->add_option("--R", R);
  fit->add_option("--lambda", lambda);
  fit->add_option("--alternations", alternations);
  fit->add_option("--grad-steps", grad_steps);
  fit->add_option("--step", step);
  fit->add_option("--side", kernel_side);
  fit->add_option("--eps", eps_rel);
  fit->add_option("--seed", seed);
  std::string init_mode = "motion";
  fit->add_option("--init", init_mode, "motion|spectral");

  auto* d2c_fit = app.add_subcommand("d2c-fit", "fit the per-class filter bank");
  d2c_fit->add_option("--manifest", manifest_path)->required();
  d2c_fit->add_option("--maps", maps_dir, "directory with map_###.png")->required();
  d2c_fit->add_option("--out", filters_path, "output filter bank json")->required();
  d2c_fit->add_option("--R", R)->required();
  d2c_fit->add_option("--patch", patch_side);
  d2c_fit->add_option("--ridge", ridge);

  auto* d2c_apply = app.add_subcommand("d2c-apply", "reconstruct x = y + e");
  d2c_apply->add_option("--manifest", manifest_path)->required();
  d2c_apply->add_option("--maps", maps_dir)->required();
  d2c_apply->add_option("--filters", filters_path)->required();
  d2c_apply->add_option("--out", out_dir)->required();

  auto* eval = app.add_subcommand("eval", "PSNR/SSIM against the sharp images");
  eval->add_option("--manifest", manifest_path)->required();
  eval->add_option("--pred", pred_dir, "directory with xhat_###.pfm")->required();
  eval->add_option("--out", out_dir)->required();
  eval->add_option("--large-fraction", large_fraction);

  auto* sweep = app.add_subcommand("sweep", "ablation sweep over R and lambda");
  sweep->add_option("--config", config_path)->required();

  auto* visualize = app.add_subcommand("visualize", "colorize a segmentation map");
  visualize->add_option("--map", map_path, "map png (gray convention)")->required();
  visualize->add_option("--R", R)->required();
  visualize->add_option("--out", out_dir, "output png path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      SynthConfig cfg = synth_config_from_json(read_json_file(config_path));
      if (synth->count("--seed")) cfg.seed = seed;
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      const DatasetManifest m = make_dataset(cfg);
      std::cout << "{\"entries\":" << m.entries.size() << ",\"output_dir\":\""
                << cfg.output_dir << "\"}\n";
    } else if (*discretize) {
      const DatasetManifest m = load_manifest(manifest_path);
      const BasisKernelSet set = load_kernel_dir(kernels_dir);
      fs::create_directories(out_dir);
      nlohmann::json diag = nlohmann::json::array();
      for (size_t i = 0; i < m.entries.size(); ++i) {
        const Image blur = load_image(m.entries[i].blur_path);
        const Image sharp = load_image(m.entries[i].sharp_path);
        LogKernelSet K(set, blur.height(), blur.width(), eps_rel);
        const DeconvolvedClassImages nu = deconvolve_class_images(blur, K);
        const BlurSegmentationMap rho = oracle_assign(nu, sharp);
        const Image xd = assemble(nu, rho);
        const std::string id = pad3(i);
        save_segmentation_png(rho, set.count(),
                              (fs::path(out_dir) / ("map_" + id + ".png")).string());
        save_image(xd, (fs::path(out_dir) / ("xd_" + id + ".pfm")).string());
        for (int r = 0; r < nu.count(); ++r)
          save_image(nu.planes[static_cast<size_t>(r)],
                     (fs::path(out_dir) /
                      ("nu_" + id + "_" + std::to_string(r) + ".pfm"))
                         .string());
        // imaginary-residue diagnostic of the assembled estimate path
        const auto Y = image_log_spectra(blur, K.rows(), K.cols(), eps_rel);
        const InverseResult inv = inv_log_fourier(
            LogSpectrum{Y[0].values - K.log_spectrum(0).values}, blur.height(),
            blur.width());
        diag.push_back({{"pair", id}, {"imag_residue", inv.imag_residue}});
      }
      write_run_fingerprint(out_dir, {{"command", "discretize"},
                                      {"R", set.count()},
                                      {"eps", eps_rel},
                                      {"diagnostics", diag}});
      std::cout << "{\"pairs\":" << m.entries.size() << "}\n";
    } else if (*fit) {
      const DatasetManifest m = load_manifest(manifest_path);
      FitOptions opt;
      opt.class_count = R;
      opt.lambda = lambda;
      opt.alternations = alternations;
      opt.grad_steps = grad_steps;
      opt.step = step;
      opt.kernel_side = kernel_side;
      opt.eps_rel = eps_rel;
      opt.seed = seed;
      opt.init = init_mode;
      const FitResult res = fit_basis_kernels(m, opt);
      fs::create_directories(out_dir);
      save_kernel_set(res.kernels, out_dir, "kernel");
      for (size_t i = 0; i < res.maps.size(); ++i)
        save_segmentation_png(
            res.maps[i], R,
            (fs::path(out_dir) / ("map_" + pad3(i) + ".png")).string());
      nlohmann::json report{{"loss_at_assign", res.report.loss_at_assign},
                            {"loss_trace", res.report.loss_trace},
                            {"class_histogram", res.report.class_histogram},
                            {"final_step", res.report.final_step}};
      std::ofstream rep(fs::path(out_dir) / "fit_report.json");
      rep << report.dump(2) << "\n";
      write_run_fingerprint(out_dir, {{"command", "fit-kernels"},
                                      {"R", R},
                                      {"lambda", lambda},
                                      {"eps", eps_rel},
                                      {"seed", seed}});
      std::cout << report["loss_at_assign"].dump() << "\n";
    } else if (*d2c_fit) {
      const DatasetManifest m = load_manifest(manifest_path);
      std::vector<BlurSegmentationMap> maps;
      for (size_t i = 0; i < m.entries.size(); ++i)
        maps.push_back(load_segmentation_png(
            (fs::path(maps_dir) / ("map_" + pad3(i) + ".png")).string(), R));
      const DesignAccumulator acc = collect_design(m, maps, R, patch_side);
      const FilterBank bank = fit_class_filters(acc, ridge);
      save_filter_bank(bank, filters_path);
      std::cout << "{\"classes\":" << R << ",\"patch\":" << patch_side << "}\n";
    } else if (*d2c_apply) {
      const DatasetManifest m = load_manifest(manifest_path);
      const FilterBank bank = load_filter_bank(filters_path);
      fs::create_directories(out_dir);
      for (size_t i = 0; i < m.entries.size(); ++i) {
        const Image blur = load_image(m.entries[i].blur_path);
        const BlurSegmentationMap rho = load_segmentation_png(
            (fs::path(maps_dir) / ("map_" + pad3(i) + ".png")).string(),
            bank.class_count);
        const Image xhat = reconstruct(blur, predict_residual(blur, rho, bank));
        save_image(xhat, (fs::path(out_dir) / ("xhat_" + pad3(i) + ".pfm")).string());
      }
      std::cout << "{\"pairs\":" << m.entries.size() << "}\n";
    } else if (*eval) {
      const DatasetManifest m = load_manifest(manifest_path);
      const std::vector<bool> large = large_motion_subset(m, large_fraction);
      std::vector<EvalRecord> records;
      for (size_t i = 0; i < m.entries.size(); ++i) {
        const Image sharp = load_image(m.entries[i].sharp_path);
        const Image xhat = load_image(
            (fs::path(pred_dir) / ("xhat_" + pad3(i) + ".pfm")).string());
        EvalRecord rec;
        rec.pair_id = pad3(i);
        rec.psnr_db = psnr(xhat, sharp);
        rec.ssim_score = ssim(xhat, sharp);
        rec.tags.push_back("total");
        if (large[i]) rec.tags.push_back("large");
        records.push_back(std::move(rec));
      }
      fs::create_directories(out_dir);
      std::ofstream js(fs::path(out_dir) / "records.json");
      js << records_to_json(records).dump(2) << "\n";
      std::ofstream csv(fs::path(out_dir) / "records.csv");
      csv << records_to_csv(records);
      std::cout << records_to_json(records).dump() << "\n";
    } else if (*sweep) {
      const SweepConfig cfg = sweep_config_from_json(read_json_file(config_path));
      const auto records = ablation_sweep(cfg);
      std::cout << "{\"records\":" << records.size() << ",\"output_dir\":\""
                << cfg.output_dir << "\"}\n";
    } else if (*visualize) {
      const BlurSegmentationMap rho = load_segmentation_png(map_path, R);
      save_image(colorize_segmentation(rho, R), out_dir);
      std::cout << "{\"classes\":" << R << "}\n";
    }
  } catch (const std::exception& ex) {
    nlohmann::json err{{"error", ex.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
