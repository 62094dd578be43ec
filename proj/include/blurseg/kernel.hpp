#ifndef BLURSEG_KERNEL_HPP
#define BLURSEG_KERNEL_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace blurseg {

/// Point-spread function: odd side length, non-negative taps summing to 1.
struct Kernel {
  Eigen::ArrayXXd taps;  // (size, size)

  int size() const { return static_cast<int>(taps.rows()); }

  /// Throws std::invalid_argument if taps are negative, non-finite, do not
  /// sum to 1 within 1e-6, or the side length is even.
  void validate() const;
};

Kernel delta_kernel(int size);

/// Zero negatives and renormalize to sum 1. Falls back to a delta when the
/// positive mass vanishes.
Kernel project_to_valid(Eigen::ArrayXXd taps);

struct BasisKernelSet {
  std::vector<Kernel> kernels;

  int count() const { return static_cast<int>(kernels.size()); }
  int side() const { return kernels.empty() ? 0 : kernels[0].size(); }
  void validate() const;
};

// Plain-text kernel format: first line "S id", then S rows of S taps.
void save_kernel(const Kernel& k, int id, const std::string& path);
Kernel load_kernel(const std::string& path, int* id_out = nullptr);

void save_kernel_set(const BasisKernelSet& set, const std::string& dir,
                     const std::string& stem,
                     std::vector<std::string>* paths_out = nullptr);

}  // namespace blurseg

#endif  // BLURSEG_KERNEL_HPP
