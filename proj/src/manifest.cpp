#include "blurseg/manifest.hpp"

#include "blurseg/image.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace blurseg {

namespace fs = std::filesystem;

void save_manifest(const DatasetManifest& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_manifest: cannot open " + path);
  out << m.metadata.dump() << "\n";
  for (const ManifestEntry& e : m.entries) {
    nlohmann::json j{{"blur_path", e.blur_path},
                     {"sharp_path", e.sharp_path},
                     {"ground_truth_kernel_ids", e.ground_truth_kernel_ids}};
    if (!e.region_mask_path.empty()) j["region_mask_path"] = e.region_mask_path;
    out << j.dump() << "\n";
  }
  if (!out) throw std::runtime_error("save_manifest: write failed " + path);
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_manifest: cannot open " + path);
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&base](const std::string& p) {
    fs::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };

  DatasetManifest m;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    if (first) {
      m.metadata = j;
      first = false;
      continue;
    }
    ManifestEntry e;
    e.blur_path = resolve(j.at("blur_path").get<std::string>());
    e.sharp_path = resolve(j.at("sharp_path").get<std::string>());
    e.ground_truth_kernel_ids =
        j.value("ground_truth_kernel_ids", std::vector<int>{});
    if (j.contains("region_mask_path"))
      e.region_mask_path = resolve(j["region_mask_path"].get<std::string>());
    if (!fs::exists(e.blur_path) || !fs::exists(e.sharp_path))
      throw std::runtime_error("load_manifest: missing pair files for entry");
    if (!e.region_mask_path.empty() && !fs::exists(e.region_mask_path))
      throw std::runtime_error("load_manifest: missing mask " + e.region_mask_path);
    Image blur = load_image(e.blur_path);
    Image sharp = load_image(e.sharp_path);
    if (!blur.same_shape(sharp))
      throw std::runtime_error("load_manifest: dimension mismatch in pair " +
                               e.blur_path);
    m.entries.push_back(std::move(e));
  }
  if (first) throw std::runtime_error("load_manifest: empty manifest " + path);
  return m;
}

}  // namespace blurseg
