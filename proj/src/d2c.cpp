#include "blurseg/d2c.hpp"

#include <fstream>
#include <stdexcept>

namespace blurseg {

DesignAccumulator::DesignAccumulator(int patch_side_, int class_count_,
                                     int channels_)
    : patch_side(patch_side_), class_count(class_count_), channels(channels_) {
  if (patch_side < 1 || patch_side % 2 == 0)
    throw std::invalid_argument("DesignAccumulator: patch side must be odd");
  const int dim = patch_side * patch_side + 1;
  xtx.assign(static_cast<size_t>(class_count),
             std::vector<Eigen::MatrixXd>(static_cast<size_t>(channels),
                                          Eigen::MatrixXd::Zero(dim, dim)));
  xty.assign(static_cast<size_t>(class_count),
             std::vector<Eigen::VectorXd>(static_cast<size_t>(channels),
                                          Eigen::VectorXd::Zero(dim)));
  counts.assign(static_cast<size_t>(class_count), 0);
}

void DesignAccumulator::merge(const DesignAccumulator& other) {
  if (patch_side != other.patch_side || class_count != other.class_count ||
      channels != other.channels)
    throw std::invalid_argument("DesignAccumulator: merge shape mismatch");
  for (size_t r = 0; r < xtx.size(); ++r) {
    for (size_t c = 0; c < xtx[r].size(); ++c) {
      xtx[r][c] += other.xtx[r][c];
      xty[r][c] += other.xty[r][c];
    }
    counts[r] += other.counts[r];
  }
}

namespace {

Eigen::VectorXd patch_row(const Plane& p, int row, int col, int patch_side) {
  const int h = static_cast<int>(p.rows()), w = static_cast<int>(p.cols());
  const int half = patch_side / 2;
  Eigen::VectorXd v(patch_side * patch_side + 1);
  int k = 0;
  for (int dr = -half; dr <= half; ++dr)
    for (int dc = -half; dc <= half; ++dc)
      v(k++) = p(((row + dr) % h + h) % h, ((col + dc) % w + w) % w);
  v(k) = 1.0;  // bias column
  return v;
}

}  // namespace

void collect_design(const Image& blur, const Image& sharp,
                    const BlurSegmentationMap& rho, DesignAccumulator* acc) {
  if (!blur.same_shape(sharp) || rho.rows() != blur.height() ||
      rho.cols() != blur.width())
    throw std::invalid_argument("collect_design: dimension mismatch");
  if (blur.channels() != acc->channels)
    throw std::invalid_argument("collect_design: channel mismatch");

  for (int col = 0; col < blur.width(); ++col) {
    for (int row = 0; row < blur.height(); ++row) {
      const int cls = rho.indices(row, col) - 1;
      if (cls < 0 || cls >= acc->class_count)
        throw std::invalid_argument("collect_design: class out of range");
      ++acc->counts[static_cast<size_t>(cls)];
      for (int ch = 0; ch < blur.channels(); ++ch) {
        const Eigen::VectorXd g =
            patch_row(blur.plane(ch), row, col, acc->patch_side);
        const double e = static_cast<double>(sharp.plane(ch)(row, col)) -
                         static_cast<double>(blur.plane(ch)(row, col));
        acc->xtx[static_cast<size_t>(cls)][static_cast<size_t>(ch)].noalias() +=
            g * g.transpose();
        acc->xty[static_cast<size_t>(cls)][static_cast<size_t>(ch)] += g * e;
      }
    }
  }
}

DesignAccumulator collect_design(const DatasetManifest& dataset,
                                 const std::vector<BlurSegmentationMap>& maps,
                                 int class_count, int patch_side) {
  if (maps.size() != dataset.entries.size())
    throw std::invalid_argument("collect_design: map count != entry count");
  const Image first = load_image(dataset.entries.at(0).blur_path);
  DesignAccumulator acc(patch_side, class_count, first.channels());
  for (size_t i = 0; i < dataset.entries.size(); ++i) {
    const Image blur = load_image(dataset.entries[i].blur_path);
    const Image sharp = load_image(dataset.entries[i].sharp_path);
    collect_design(blur, sharp, maps[i], &acc);
  }
  return acc;
}

FilterBank fit_class_filters(const DesignAccumulator& acc, double ridge) {
  if (ridge < 0.0) throw std::invalid_argument("fit_class_filters: ridge < 0");
  const int dim = acc.patch_side * acc.patch_side + 1;

  FilterBank fb;
  fb.patch_side = acc.patch_side;
  fb.class_count = acc.class_count;
  fb.channels = acc.channels;
  fb.ridge = ridge;
  fb.weights.assign(static_cast<size_t>(acc.class_count),
                    std::vector<Eigen::VectorXd>(
                        static_cast<size_t>(acc.channels),
                        Eigen::VectorXd::Zero(dim - 1)));
  fb.bias.assign(static_cast<size_t>(acc.class_count),
                 std::vector<double>(static_cast<size_t>(acc.channels), 0.0));

  for (int r = 0; r < acc.class_count; ++r) {
    if (acc.counts[static_cast<size_t>(r)] == 0) continue;  // zero filter
    for (int c = 0; c < acc.channels; ++c) {
      Eigen::MatrixXd A = acc.xtx[static_cast<size_t>(r)][static_cast<size_t>(c)];
      A.diagonal().array() += ridge;
      const Eigen::VectorXd& b =
          acc.xty[static_cast<size_t>(r)][static_cast<size_t>(c)];
      Eigen::LDLT<Eigen::MatrixXd> solver(A);
      const Eigen::VectorXd w = solver.solve(b);
      const double residual = (A * w - b).lpNorm<Eigen::Infinity>();
      const double scale = std::max(b.lpNorm<Eigen::Infinity>(), 1e-30);
      if (solver.info() != Eigen::Success || residual > 1e-6 * scale + 1e-12)
        throw std::runtime_error(
            "fit_class_filters: singular normal equations; increase ridge");
      fb.weights[static_cast<size_t>(r)][static_cast<size_t>(c)] = w.head(dim - 1);
      fb.bias[static_cast<size_t>(r)][static_cast<size_t>(c)] = w(dim - 1);
    }
  }
  return fb;
}

Image predict_residual(const Image& y, const BlurSegmentationMap& rho,
                       const FilterBank& fb) {
  if (rho.rows() != y.height() || rho.cols() != y.width())
    throw std::invalid_argument("predict_residual: dimension mismatch");
  if (y.channels() != fb.channels)
    throw std::invalid_argument("predict_residual: channel mismatch");
  if ((rho.indices > fb.class_count).any() || (rho.indices < 1).any())
    throw std::invalid_argument("predict_residual: class not covered by bank");

  const int dim = fb.patch_side * fb.patch_side;
  Image residual(y.height(), y.width(), y.channels());
  for (int ch = 0; ch < y.channels(); ++ch) {
    for (int col = 0; col < y.width(); ++col) {
      for (int row = 0; row < y.height(); ++row) {
        const int cls = rho.indices(row, col) - 1;
        const Eigen::VectorXd g = patch_row(y.plane(ch), row, col, fb.patch_side);
        residual.plane(ch)(row, col) = static_cast<float>(
            g.head(dim).dot(
                fb.weights[static_cast<size_t>(cls)][static_cast<size_t>(ch)]) +
            fb.bias[static_cast<size_t>(cls)][static_cast<size_t>(ch)]);
      }
    }
  }
  return residual;
}

Image reconstruct(const Image& y, const Image& residual) {
  if (!y.same_shape(residual))
    throw std::invalid_argument("reconstruct: dimension mismatch");
  Image out(y.height(), y.width(), y.channels());
  for (int c = 0; c < y.channels(); ++c)
    out.plane(c) = y.plane(c) + residual.plane(c);
  return clamp01(std::move(out));
}

void save_filter_bank(const FilterBank& fb, const std::string& path) {
  nlohmann::json classes = nlohmann::json::array();
  for (int r = 0; r < fb.class_count; ++r) {
    nlohmann::json chans = nlohmann::json::array();
    for (int c = 0; c < fb.channels; ++c) {
      const Eigen::VectorXd& w =
          fb.weights[static_cast<size_t>(r)][static_cast<size_t>(c)];
      chans.push_back(
          {{"taps", std::vector<double>(w.data(), w.data() + w.size())},
           {"bias", fb.bias[static_cast<size_t>(r)][static_cast<size_t>(c)]}});
    }
    classes.push_back(chans);
  }
  nlohmann::json j{{"patch_side", fb.patch_side},
                   {"class_count", fb.class_count},
                   {"channels", fb.channels},
                   {"ridge", fb.ridge},
                   {"classes", classes}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_filter_bank: cannot open " + path);
  out << j.dump(2) << "\n";
}

FilterBank load_filter_bank(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_filter_bank: cannot open " + path);
  nlohmann::json j;
  in >> j;

  FilterBank fb;
  fb.patch_side = j.at("patch_side");
  fb.class_count = j.at("class_count");
  fb.channels = j.at("channels");
  fb.ridge = j.value("ridge", 0.0);
  for (const auto& chans : j.at("classes")) {
    std::vector<Eigen::VectorXd> ws;
    std::vector<double> bs;
    for (const auto& ch : chans) {
      const std::vector<double> taps = ch.at("taps");
      ws.push_back(Eigen::Map<const Eigen::VectorXd>(
          taps.data(), static_cast<Eigen::Index>(taps.size())));
      bs.push_back(ch.at("bias"));
    }
    fb.weights.push_back(std::move(ws));
    fb.bias.push_back(std::move(bs));
  }
  return fb;
}

}  // namespace blurseg
