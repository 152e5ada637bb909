#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "mvfuse/kernel.hpp"
#include "mvfuse/rng.hpp"
#include "test_util.hpp"

using mvfuse::compute_kernel;
using mvfuse::Error;
using mvfuse::ErrorCode;
using mvfuse::FeatureView;
using mvfuse::KernelKind;
using mvfuse::KernelMatrix;
using mvfuse::KernelSpec;
using mvfuse::Matrix;
using mvfuse::Rng;
using mvfuse::Vector;

namespace {

Matrix random_features(Eigen::Index n, Eigen::Index d, Rng& rng) {
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rng.gaussian();
  return x;
}

// entrywise oracle evaluated one pair at a time, no Gram shortcut
double kernel_entry(const Matrix& x, Eigen::Index i, Eigen::Index j, const KernelSpec& spec) {
  const double dot = x.row(i).dot(x.row(j));
  const double dist = (x.row(i) - x.row(j)).norm();
  switch (spec.kind) {
    case KernelKind::Linear: return dot;
    case KernelKind::Polynomial: return std::pow(dot, spec.degree);
    case KernelKind::Gaussian: return std::exp(-dist * dist / (2.0 * spec.sigma * spec.sigma));
    case KernelKind::Laplace: return std::exp(-dist / spec.sigma);
    case KernelKind::Sigmoid: return std::tanh(spec.gamma * dot + spec.theta);
  }
  return 0.0;
}

}  // namespace

TEST_CASE("compute_kernel matches the entrywise formula for every kind") {
  Rng rng(2024);
  const Matrix x = random_features(14, 4, rng);
  std::vector<KernelSpec> specs;
  specs.push_back({KernelKind::Linear, 1, 1.0, 1.0, -1.0});
  specs.push_back({KernelKind::Polynomial, 3, 1.0, 1.0, -1.0});
  specs.push_back({KernelKind::Gaussian, 1, 1.7, 1.0, -1.0});
  specs.push_back({KernelKind::Laplace, 1, 2.3, 1.0, -1.0});
  specs.push_back({KernelKind::Sigmoid, 1, 1.0, 0.8, -0.5});
  for (const KernelSpec& spec : specs) {
    const KernelMatrix k = compute_kernel(FeatureView{x, 0}, spec);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.rows(); ++j)
        REQUIRE(k.values(i, j) ==
                Catch::Approx(kernel_entry(x, i, j, spec)).margin(1e-10).epsilon(1e-10));
    REQUIRE((k.values - k.values.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("gaussian kernel hits exp(-1) at squared distance two sigma squared") {
  const double sigma = 1.3;
  Matrix x(2, 2);
  x << 0.0, 0.0, sigma * std::sqrt(2.0), 0.0;
  const KernelMatrix k =
      compute_kernel(FeatureView{x, 0}, KernelSpec{KernelKind::Gaussian, 1, sigma, 1.0, -1.0});
  REQUIRE(k.values(0, 1) == Catch::Approx(0.36787944117144233).epsilon(1e-12));
  REQUIRE(k.values(0, 0) == 1.0);
  REQUIRE(k.values(1, 1) == 1.0);
}

TEST_CASE("kernel spec validation rejects out-of-range parameters") {
  REQUIRE_THROWS_AS(
      mvfuse::validate_kernel_spec(KernelSpec{KernelKind::Gaussian, 1, 0.0, 1.0, -1.0}), Error);
  REQUIRE_THROWS_AS(
      mvfuse::validate_kernel_spec(KernelSpec{KernelKind::Laplace, 1, -2.0, 1.0, -1.0}), Error);
  REQUIRE_THROWS_AS(
      mvfuse::validate_kernel_spec(KernelSpec{KernelKind::Polynomial, 0, 1.0, 1.0, -1.0}), Error);
  REQUIRE_THROWS_AS(
      mvfuse::validate_kernel_spec(KernelSpec{KernelKind::Sigmoid, 1, 1.0, 0.0, -1.0}), Error);
  REQUIRE_THROWS_AS(
      mvfuse::validate_kernel_spec(KernelSpec{KernelKind::Sigmoid, 1, 1.0, 1.0, 0.0}), Error);
  try {
    mvfuse::validate_kernel_spec(KernelSpec{KernelKind::Sigmoid, 1, 1.0, 1.0, 0.5});
    FAIL("expected a throw");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::InvalidSpec);
  }
  REQUIRE(mvfuse::parse_kernel_kind("gaussian") == KernelKind::Gaussian);
  REQUIRE_THROWS_AS(mvfuse::parse_kernel_kind("rbf"), Error);
}

TEST_CASE("centering matches the explicit projector product") {
  Rng rng(5);
  const Eigen::Index n = 9;
  const Matrix k = testutil::random_spd(n, rng);
  const Matrix c = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  const Matrix oracle = c * k * c;
  const KernelMatrix centered = mvfuse::center_kernel(KernelMatrix{k, 0});
  REQUIRE((centered.values - oracle).cwiseAbs().maxCoeff() < 1e-12);
  // row sums of a centered kernel vanish
  REQUIRE(centered.values.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  // idempotence
  const KernelMatrix twice = mvfuse::center_kernel(centered);
  REQUIRE((twice.values - centered.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("normalization produces a unit diagonal and the rank-one case collapses") {
  Matrix k(2, 2);
  k << 4.0, 2.0, 2.0, 1.0;
  const KernelMatrix normalized = mvfuse::normalize_kernel(KernelMatrix{k, 0});
  REQUIRE(normalized.values(0, 0) == 1.0);
  REQUIRE(normalized.values(1, 1) == 1.0);
  REQUIRE(normalized.values(0, 1) == Catch::Approx(1.0).epsilon(1e-15));

  Rng rng(6);
  const KernelMatrix random = {testutil::random_spd(12, rng), 3};
  const KernelMatrix out = mvfuse::normalize_kernel(random);
  REQUIRE(out.view_id == 3);
  for (Eigen::Index i = 0; i < 12; ++i) REQUIRE(out.values(i, i) == 1.0);
  // cosine bound
  REQUIRE(out.values.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
  for (Eigen::Index i = 0; i < 12; ++i)
    for (Eigen::Index j = 0; j < 12; ++j)
      REQUIRE(out.values(i, j) ==
              Catch::Approx(random.values(i, j) /
                            std::sqrt(random.values(i, i) * random.values(j, j)))
                  .margin(1e-12));
}

TEST_CASE("normalization rejects degenerate diagonals") {
  Matrix k = Matrix::Zero(3, 3);
  k(0, 0) = 1.0;
  k(1, 1) = 1e-13;  // below the threshold
  k(2, 2) = 1.0;
  try {
    mvfuse::normalize_kernel(KernelMatrix{k, 0});
    FAIL("expected a throw");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::DegenerateDiagonal);
  }
}

TEST_CASE("asymmetry validation symmetrizes small noise and rejects large") {
  Rng rng(8);
  Matrix k = testutil::random_spd(10, rng);
  Matrix noisy = k;
  noisy(2, 5) += 1e-8;  // well under tolerance relative to O(1) entries
  double asym = 0.0;
  const KernelMatrix out = mvfuse::validate_and_symmetrize(noisy, 4, &asym);
  REQUIRE(asym > 0.0);
  REQUIRE(out.view_id == 4);
  REQUIRE((out.values - out.values.transpose()).cwiseAbs().maxCoeff() == 0.0);

  Matrix bad = k;
  bad(1, 2) += 1.0;
  try {
    mvfuse::validate_and_symmetrize(bad);
    FAIL("expected a throw");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::AsymmetricInput);
  }

  REQUIRE_THROWS_AS(mvfuse::validate_and_symmetrize(Matrix::Zero(2, 3)), Error);
  Matrix nan_matrix = k;
  nan_matrix(0, 0) = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(mvfuse::validate_and_symmetrize(nan_matrix), Error);
}

TEST_CASE("preprocess is centering followed by normalization") {
  Rng rng(12);
  const KernelMatrix k = {testutil::random_spd(11, rng), 0};
  const KernelMatrix expected = mvfuse::normalize_kernel(mvfuse::center_kernel(k));
  const KernelMatrix got = mvfuse::preprocess_kernel(k);
  REQUIRE((got.values - expected.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("average kernel is the entrywise mean") {
  Rng rng(13);
  std::vector<KernelMatrix> kernels;
  for (int p = 0; p < 3; ++p) kernels.push_back({testutil::random_spd(7, rng), p});
  const KernelMatrix avg = mvfuse::average_kernel(kernels);
  const Matrix oracle = (kernels[0].values + kernels[1].values + kernels[2].values) / 3.0;
  REQUIRE((avg.values - oracle).cwiseAbs().maxCoeff() < 1e-15);
  REQUIRE(avg.view_id == -1);

  kernels.push_back({testutil::random_spd(8, rng), 3});
  REQUIRE_THROWS_AS(mvfuse::average_kernel(kernels), Error);
  REQUIRE_THROWS_AS(mvfuse::average_kernel(std::vector<KernelMatrix>{}), Error);
}

TEST_CASE("compute_kernel validates inputs") {
  Matrix one_row(1, 2);
  one_row << 1.0, 2.0;
  REQUIRE_THROWS_AS(compute_kernel(FeatureView{one_row, 0}, KernelSpec{}), Error);
  Matrix with_nan(3, 2);
  with_nan.setZero();
  with_nan(1, 1) = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(compute_kernel(FeatureView{with_nan, 0}, KernelSpec{}), Error);
}
