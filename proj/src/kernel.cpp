#include "blurseg/kernel.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace blurseg {

void Kernel::validate() const {
  if (taps.rows() != taps.cols() || taps.rows() < 1 || taps.rows() % 2 == 0)
    throw std::invalid_argument("Kernel: side must be odd and positive");
  if (!taps.isFinite().all() || (taps < 0.0).any())
    throw std::invalid_argument("Kernel: taps must be finite and non-negative");
  if (std::abs(taps.sum() - 1.0) > 1e-6)
    throw std::invalid_argument("Kernel: taps must sum to 1");
}

Kernel delta_kernel(int size) {
  Kernel k{Eigen::ArrayXXd::Zero(size, size)};
  k.taps(size / 2, size / 2) = 1.0;
  return k;
}

Kernel project_to_valid(Eigen::ArrayXXd taps) {
  taps = taps.cwiseMax(0.0);
  const double mass = taps.sum();
  if (!(mass > 1e-12)) return delta_kernel(static_cast<int>(taps.rows()));
  return Kernel{taps / mass};
}

void BasisKernelSet::validate() const {
  if (kernels.empty()) throw std::invalid_argument("BasisKernelSet: empty");
  for (const Kernel& k : kernels) {
    k.validate();
    if (k.size() != side())
      throw std::invalid_argument("BasisKernelSet: mismatched side lengths");
  }
}

void save_kernel(const Kernel& k, int id, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_kernel: cannot open " + path);
  const int s = k.size();
  out << s << " " << id << "\n";
  out << std::setprecision(17);
  for (int r = 0; r < s; ++r) {
    for (int c = 0; c < s; ++c) out << (c ? " " : "") << k.taps(r, c);
    out << "\n";
  }
  if (!out) throw std::runtime_error("save_kernel: write failed " + path);
}

Kernel load_kernel(const std::string& path, int* id_out) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_kernel: cannot open " + path);
  int s = 0, id = 0;
  in >> s >> id;
  if (!in || s < 1) throw std::runtime_error("load_kernel: bad header " + path);
  Kernel k{Eigen::ArrayXXd::Zero(s, s)};
  for (int r = 0; r < s; ++r)
    for (int c = 0; c < s; ++c) in >> k.taps(r, c);
  if (!in) throw std::runtime_error("load_kernel: truncated " + path);
  if (id_out) *id_out = id;
  return k;
}

void save_kernel_set(const BasisKernelSet& set, const std::string& dir,
                     const std::string& stem,
                     std::vector<std::string>* paths_out) {
  std::filesystem::create_directories(dir);
  for (int r = 0; r < set.count(); ++r) {
    std::ostringstream name;
    name << stem << "_" << std::setw(2) << std::setfill('0') << r << ".txt";
    const std::string path = (std::filesystem::path(dir) / name.str()).string();
    save_kernel(set.kernels[static_cast<size_t>(r)], r, path);
    if (paths_out) paths_out->push_back(path);
  }
}

}  // namespace blurseg
