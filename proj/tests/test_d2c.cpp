#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "blurseg/d2c.hpp"
#include "blurseg/metrics.hpp"
#include "test_util.hpp"

#include <random>

using namespace blurseg;
using namespace blurseg::testutil;

namespace {

BlurSegmentationMap constant_map(int h, int w, int cls) {
  BlurSegmentationMap m;
  m.indices = Eigen::ArrayXXi::Constant(h, w, cls);
  return m;
}

// periodic cross-correlation of y with a PxP tap vector (row-major patch
// order) plus bias: the operation a per-class filter is supposed to apply
Plane correlate_oracle(const Plane& y, const Eigen::VectorXd& taps, double bias,
                       int patch_side) {
  const int h = static_cast<int>(y.rows()), w = static_cast<int>(y.cols());
  const int half = patch_side / 2;
  Plane out(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double acc = bias;
      int k = 0;
      for (int dr = -half; dr <= half; ++dr)
        for (int dc = -half; dc <= half; ++dc)
          acc += taps(k++) * y(((r + dr) % h + h) % h, ((c + dc) % w + w) % w);
      out(r, c) = static_cast<float>(acc);
    }
  return out;
}

double training_sse(const Image& y, const Image& x,
                    const BlurSegmentationMap& rho, const FilterBank& fb) {
  const Image pred = predict_residual(y, rho, fb);
  double sse = 0.0;
  for (int c = 0; c < y.channels(); ++c)
    sse += (pred.plane(c) - (x.plane(c) - y.plane(c))).square().sum();
  return sse;
}

}  // namespace

TEST_CASE("identical blur and sharp images train the zero filter") {
  const Image y = random_image(1, 24, 24, 2);
  DesignAccumulator acc(3, 1, 2);
  collect_design(y, y, constant_map(24, 24, 1), &acc);
  const FilterBank fb = fit_class_filters(acc, 1e-6);
  for (int c = 0; c < 2; ++c) {
    CHECK(fb.weights[0][static_cast<size_t>(c)].lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK(std::abs(fb.bias[0][static_cast<size_t>(c)]) < 1e-9);
  }
}

TEST_CASE("solver matches a dense SVD solution of the same normal equations") {
  std::mt19937_64 rng(2);
  const Image y = random_image(rng(), 16, 16, 1);
  const Image x = random_image(rng(), 16, 16, 1);
  const double ridge = 1e-3;
  const int P = 3, dim = P * P + 1;

  DesignAccumulator acc(P, 1, 1);
  collect_design(y, x, constant_map(16, 16, 1), &acc);
  const FilterBank fb = fit_class_filters(acc, ridge);

  // rebuild the full design matrix from scratch and solve independently
  Eigen::MatrixXd G(16 * 16, dim);
  Eigen::VectorXd e(16 * 16);
  long i = 0;
  for (int col = 0; col < 16; ++col)
    for (int row = 0; row < 16; ++row, ++i) {
      int k = 0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc)
          G(i, k++) = y.plane(0)(((row + dr) % 16 + 16) % 16,
                                 ((col + dc) % 16 + 16) % 16);
      G(i, dim - 1) = 1.0;
      e(i) = static_cast<double>(x.plane(0)(row, col)) -
             static_cast<double>(y.plane(0)(row, col));
    }
  Eigen::MatrixXd A = G.transpose() * G;
  A.diagonal().array() += ridge;
  const Eigen::VectorXd w_ref =
      A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(G.transpose() * e);

  CHECK((fb.weights[0][0] - w_ref.head(dim - 1)).lpNorm<Eigen::Infinity>() < 1e-4);
  CHECK(std::abs(fb.bias[0][0] - w_ref(dim - 1)) < 1e-4);
}

TEST_CASE("a planted linear patch relation is recovered exactly") {
  std::mt19937_64 rng(3);
  const int P = 3;
  Eigen::VectorXd taps(P * P);
  std::uniform_real_distribution<double> coef(-0.2, 0.2);
  for (int k = 0; k < P * P; ++k) taps(k) = coef(rng);
  const double bias = 0.03;

  const Image y = random_image(rng(), 32, 32, 1);
  Image x = y;
  x.plane(0) += correlate_oracle(y.plane(0), taps, bias, P);

  DesignAccumulator acc(P, 1, 1);
  collect_design(y, x, constant_map(32, 32, 1), &acc);
  const FilterBank fb = fit_class_filters(acc, 0.0);

  CHECK((fb.weights[0][0] - taps).lpNorm<Eigen::Infinity>() < 1e-5);
  CHECK(std::abs(fb.bias[0][0] - bias) < 1e-5);

  const Image pred = predict_residual(y, constant_map(32, 32, 1), fb);
  CHECK((pred.plane(0) - (x.plane(0) - y.plane(0))).abs().maxCoeff() < 1e-5);
}

TEST_CASE("prediction equals periodic correlation with the class taps") {
  const Image y = random_image(4, 20, 20, 1);
  FilterBank fb;
  fb.patch_side = 5;
  fb.class_count = 1;
  fb.channels = 1;
  Eigen::VectorXd taps = Eigen::VectorXd::Zero(25);
  taps(12) = 1.0;   // center
  taps(0) = -0.25;  // top-left corner of the patch
  fb.weights = {{taps}};
  fb.bias = {{0.1}};

  const Image pred = predict_residual(y, constant_map(20, 20, 1), fb);
  const Plane oracle = correlate_oracle(y.plane(0), taps, 0.1, 5);
  CHECK((pred.plane(0) - oracle).abs().maxCoeff() < 1e-6);
}

TEST_CASE("relabeling classes and permuting the bank leaves prediction unchanged") {
  std::mt19937_64 rng(5);
  const Image y = random_image(rng(), 16, 16, 2);
  const Image x = random_image(rng(), 16, 16, 2);
  BlurSegmentationMap rho;
  rho.indices.resize(16, 16);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) rho.indices(r, c) = static_cast<int>(rng() % 3) + 1;

  DesignAccumulator acc(3, 3, 2);
  collect_design(y, x, rho, &acc);
  const FilterBank fb = fit_class_filters(acc, 1e-4);

  FilterBank swapped = fb;  // cycle classes 1->2->3->1
  swapped.weights = {fb.weights[2], fb.weights[0], fb.weights[1]};
  swapped.bias = {fb.bias[2], fb.bias[0], fb.bias[1]};
  BlurSegmentationMap relabeled;
  relabeled.indices = rho.indices.unaryExpr([](int v) { return v % 3 + 1; });

  const Image a = predict_residual(y, rho, fb);
  const Image b = predict_residual(y, relabeled, swapped);
  CHECK(max_abs_diff(a, b) == 0.0);
}

TEST_CASE("finer class partitions never raise the training error") {
  std::mt19937_64 rng(6);
  const Image y = random_image(rng(), 32, 32, 1);
  Image x = random_image(rng(), 32, 32, 1);
  x.plane(0) = 0.5f * x.plane(0) + 0.5f * y.plane(0);

  BlurSegmentationMap split;  // left/right halves
  split.indices.resize(32, 32);
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c) split.indices(r, c) = c < 16 ? 1 : 2;

  DesignAccumulator coarse(3, 1, 1), fine(3, 2, 1);
  collect_design(y, x, constant_map(32, 32, 1), &coarse);
  collect_design(y, x, split, &fine);
  const FilterBank fb1 = fit_class_filters(coarse, 0.0);
  const FilterBank fb2 = fit_class_filters(fine, 0.0);

  const double sse1 = training_sse(y, x, constant_map(32, 32, 1), fb1);
  const double sse2 = training_sse(y, x, split, fb2);
  CHECK(sse2 <= sse1 + 1e-9);
}

TEST_CASE("empty classes carry the zero filter and predict a zero residual") {
  const Image y = random_image(7, 16, 16, 1);
  const Image x = random_image(8, 16, 16, 1);
  DesignAccumulator acc(3, 3, 1);
  collect_design(y, x, constant_map(16, 16, 2), &acc);  // only class 2 is used
  const FilterBank fb = fit_class_filters(acc, 1e-4);

  CHECK(fb.weights[0][0].lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(fb.weights[2][0].lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(fb.weights[1][0].lpNorm<Eigen::Infinity>() > 0.0);

  const Image pred = predict_residual(y, constant_map(16, 16, 3), fb);
  CHECK(pred.plane(0).abs().maxCoeff() == 0.0f);
  const Image rec = reconstruct(y, pred);
  CHECK(max_abs_diff(rec, clamp01(y)) == 0.0);
}

TEST_CASE("rank-deficient constant design stays stable under ridge") {
  Image flat(16, 16, 1);
  flat.plane(0).setConstant(0.5f);
  Image target(16, 16, 1);
  target.plane(0).setConstant(0.7f);
  DesignAccumulator acc(3, 1, 1);
  collect_design(flat, target, constant_map(16, 16, 1), &acc);
  // nine identical patch columns: singular but consistent normal equations
  const FilterBank fb = fit_class_filters(acc, 1e-8);
  const Image pred = predict_residual(flat, constant_map(16, 16, 1), fb);
  CHECK((pred.plane(0) - 0.2f).abs().maxCoeff() < 1e-4);
}

TEST_CASE("merged accumulators equal one accumulator over both images") {
  std::mt19937_64 rng(9);
  const Image y1 = random_image(rng(), 16, 16, 1), x1 = random_image(rng(), 16, 16, 1);
  const Image y2 = random_image(rng(), 16, 16, 1), x2 = random_image(rng(), 16, 16, 1);
  const BlurSegmentationMap m = constant_map(16, 16, 1);

  DesignAccumulator joint(3, 1, 1), a(3, 1, 1), b(3, 1, 1);
  collect_design(y1, x1, m, &joint);
  collect_design(y2, x2, m, &joint);
  collect_design(y1, x1, m, &a);
  collect_design(y2, x2, m, &b);
  a.merge(b);

  // summation order differs between the two paths, so allow rounding noise
  CHECK((joint.xtx[0][0] - a.xtx[0][0]).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((joint.xty[0][0] - a.xty[0][0]).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK(joint.counts[0] == a.counts[0]);
}

TEST_CASE("reconstruct adds the residual and clamps to the unit interval") {
  Image y(2, 2, 1), res(2, 2, 1);
  y.plane(0) << 0.2f, 0.9f, 0.5f, 0.0f;
  res.plane(0) << -0.5f, 0.3f, 0.1f, -0.1f;
  const Image out = reconstruct(y, res);
  CHECK(out.plane(0)(0, 0) == 0.0f);
  CHECK(out.plane(0)(0, 1) == 1.0f);
  CHECK(out.plane(0)(1, 0) == doctest::Approx(0.6f));
  CHECK(out.plane(0)(1, 1) == 0.0f);

  Image bad(3, 2, 1);
  CHECK_THROWS_AS(reconstruct(y, bad), std::invalid_argument);
}

TEST_CASE("filter bank survives a json round trip") {
  std::mt19937_64 rng(10);
  const Image y = random_image(rng(), 16, 16, 3);
  const Image x = random_image(rng(), 16, 16, 3);
  BlurSegmentationMap rho;
  rho.indices.resize(16, 16);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) rho.indices(r, c) = static_cast<int>(rng() % 2) + 1;

  DesignAccumulator acc(5, 2, 3);
  collect_design(y, x, rho, &acc);
  const FilterBank fb = fit_class_filters(acc, 1e-3);

  TempDir dir("fbjson");
  const std::string path = dir.str() + "/bank.json";
  save_filter_bank(fb, path);
  const FilterBank back = load_filter_bank(path);

  CHECK(back.patch_side == fb.patch_side);
  CHECK(back.class_count == fb.class_count);
  CHECK(back.channels == fb.channels);
  CHECK(back.ridge == fb.ridge);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) {
      const auto ri = static_cast<size_t>(r);
      const auto ci = static_cast<size_t>(c);
      CHECK((back.weights[ri][ci] - fb.weights[ri][ci]).lpNorm<Eigen::Infinity>() <
            1e-12);
      CHECK(back.bias[ri][ci] == doctest::Approx(fb.bias[ri][ci]).epsilon(1e-12));
    }
  // predictions agree through the round trip
  CHECK(max_abs_diff(predict_residual(y, rho, fb), predict_residual(y, rho, back)) <
        1e-7);
}

TEST_CASE("prediction rejects maps referencing classes outside the bank") {
  const Image y = random_image(11, 8, 8, 1);
  DesignAccumulator acc(3, 1, 1);
  collect_design(y, y, constant_map(8, 8, 1), &acc);
  const FilterBank fb = fit_class_filters(acc, 1e-4);
  CHECK_THROWS_AS(predict_residual(y, constant_map(8, 8, 2), fb),
                  std::invalid_argument);
}
