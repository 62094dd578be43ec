#ifndef BLURSEG_MANIFEST_HPP
#define BLURSEG_MANIFEST_HPP

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace blurseg {

struct ManifestEntry {
  std::string blur_path;
  std::string sharp_path;
  std::vector<int> ground_truth_kernel_ids;
  std::string region_mask_path;  // empty when the blur is uniform
};

/// JSON-Lines dataset index. The first line is a metadata object
/// ({"seed":..., "kernel_params":..., "kernel_paths":[...]}); each
/// following line is one entry.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  nlohmann::json metadata;  // must contain "seed"

  uint64_t seed() const { return metadata.value("seed", uint64_t{0}); }
};

void save_manifest(const DatasetManifest& m, const std::string& path);

/// Loads and validates: every referenced path must resolve and each
/// blur/sharp pair must be dimension-matched. Relative paths resolve
/// against the manifest's directory.
DatasetManifest load_manifest(const std::string& path);

}  // namespace blurseg

#endif  // BLURSEG_MANIFEST_HPP
