#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "mvfuse/errors.hpp"

namespace mvfuse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// one view's raw features, rows = samples
struct FeatureView {
  Matrix data;
  int view_id = 0;
};

enum class KernelKind { Linear, Polynomial, Gaussian, Laplace, Sigmoid };

inline const char* kernel_kind_name(KernelKind k) {
  switch (k) {
    case KernelKind::Linear: return "linear";
    case KernelKind::Polynomial: return "polynomial";
    case KernelKind::Gaussian: return "gaussian";
    case KernelKind::Laplace: return "laplace";
    case KernelKind::Sigmoid: return "sigmoid";
  }
  return "unknown";
}

inline KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "linear") return KernelKind::Linear;
  if (s == "polynomial") return KernelKind::Polynomial;
  if (s == "gaussian") return KernelKind::Gaussian;
  if (s == "laplace") return KernelKind::Laplace;
  if (s == "sigmoid") return KernelKind::Sigmoid;
  throw Error(ErrorCode::InvalidSpec, "unknown kernel kind '" + s + "'");
}

struct KernelSpec {
  KernelKind kind = KernelKind::Linear;
  int degree = 1;      // polynomial
  double sigma = 1.0;  // gaussian / laplace bandwidth
  double gamma = 1.0;  // sigmoid slope
  double theta = -1.0; // sigmoid offset, must stay negative
};

inline void validate_kernel_spec(const KernelSpec& spec) {
  switch (spec.kind) {
    case KernelKind::Linear:
      break;
    case KernelKind::Polynomial:
      if (spec.degree < 1) throw Error(ErrorCode::InvalidSpec, "polynomial degree must be >= 1");
      break;
    case KernelKind::Gaussian:
    case KernelKind::Laplace:
      if (!(spec.sigma > 0.0)) throw Error(ErrorCode::InvalidSpec, "sigma must be > 0");
      break;
    case KernelKind::Sigmoid:
      if (!(spec.gamma > 0.0)) throw Error(ErrorCode::InvalidSpec, "gamma must be > 0");
      if (!(spec.theta < 0.0)) throw Error(ErrorCode::InvalidSpec, "theta must be < 0");
      break;
  }
}

// n x n similarity matrix for one view
struct KernelMatrix {
  Matrix values;
  int view_id = 0;

  Eigen::Index n() const { return values.rows(); }
};

namespace detail {

// copy the upper triangle onto the lower one; makes Gram products exactly
// symmetric regardless of how the matrix product was blocked
inline void mirror_upper(Matrix& a) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) a(i, j) = a(j, i);
}

}  // namespace detail

inline KernelMatrix compute_kernel(const FeatureView& view, const KernelSpec& spec) {
  validate_kernel_spec(spec);
  const Matrix& x = view.data;
  if (x.rows() < 2 || x.cols() < 1)
    throw Error(ErrorCode::InvalidInput, "feature view needs n >= 2 samples and d >= 1 columns");
  if (!x.allFinite()) throw Error(ErrorCode::InvalidInput, "non-finite feature entries");

  const Eigen::Index n = x.rows();
  Matrix gram = x * x.transpose();
  detail::mirror_upper(gram);

  Matrix k(n, n);
  switch (spec.kind) {
    case KernelKind::Linear:
      k = gram;
      break;
    case KernelKind::Polynomial:
      k = gram.array().pow(static_cast<double>(spec.degree));
      break;
    case KernelKind::Sigmoid:
      k = (spec.gamma * gram.array() + spec.theta).tanh();
      break;
    case KernelKind::Gaussian:
    case KernelKind::Laplace: {
      const Vector sq = gram.diagonal();
      // squared distances from the Gram matrix; rounding can push tiny
      // values below zero, clamp before the sqrt
      Matrix d2 = (-2.0 * gram).colwise() + sq;
      d2.rowwise() += sq.transpose();
      d2 = d2.cwiseMax(0.0);
      if (spec.kind == KernelKind::Gaussian) {
        k = (-d2.array() / (2.0 * spec.sigma * spec.sigma)).exp();
      } else {
        k = (-d2.array().sqrt() / spec.sigma).exp();
      }
      break;
    }
  }
  detail::mirror_upper(k);
  return KernelMatrix{std::move(k), view.view_id};
}

// K -> C K C with C = I - 11^T/n; kills the constant component in each row/column
inline KernelMatrix center_kernel(const KernelMatrix& kernel) {
  const Matrix& k = kernel.values;
  if (k.rows() != k.cols()) throw Error(ErrorCode::InvalidShape, "kernel must be square");
  if (!k.allFinite()) throw Error(ErrorCode::InvalidInput, "non-finite kernel entries");
  const Vector row_mean = k.rowwise().mean();
  const double grand_mean = row_mean.mean();
  Matrix out = k;
  out.colwise() -= row_mean;
  out.rowwise() -= row_mean.transpose();
  out.array() += grand_mean;
  return KernelMatrix{std::move(out), kernel.view_id};
}

inline constexpr double kDegenerateDiagonalEps = 1e-12;

// cosine normalization: out[i][j] = k[i][j] / sqrt(k[i][i] k[j][j])
inline KernelMatrix normalize_kernel(const KernelMatrix& kernel,
                                     double eps = kDegenerateDiagonalEps) {
  const Matrix& k = kernel.values;
  if (k.rows() != k.cols()) throw Error(ErrorCode::InvalidShape, "kernel must be square");
  const Eigen::Index n = k.rows();
  Vector inv_scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = k(i, i);
    if (!(d > eps))
      throw Error(ErrorCode::DegenerateDiagonal,
                  "diagonal entry " + std::to_string(i) + " is " + std::to_string(d) +
                      "; duplicate or zero sample after centering");
    inv_scale(i) = 1.0 / std::sqrt(d);
  }
  Matrix out = inv_scale.asDiagonal() * k * inv_scale.asDiagonal();
  out.diagonal().setOnes();
  detail::mirror_upper(out);
  return KernelMatrix{std::move(out), kernel.view_id};
}

// largest |k[i][j] - k[j][i]| relative to the largest magnitude entry
inline double relative_asymmetry(const Matrix& raw) {
  const double scale = raw.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (raw - raw.transpose()).cwiseAbs().maxCoeff() / scale;
}

inline constexpr double kAsymmetryTolerance = 1e-6;

inline KernelMatrix validate_and_symmetrize(const Matrix& raw, int view_id = 0,
                                            double* max_asymmetry = nullptr) {
  if (raw.rows() != raw.cols()) throw Error(ErrorCode::InvalidShape, "kernel must be square");
  if (!raw.allFinite()) throw Error(ErrorCode::InvalidInput, "non-finite kernel entries");
  const double asym = relative_asymmetry(raw);
  if (max_asymmetry) *max_asymmetry = asym;
  if (asym > kAsymmetryTolerance)
    throw Error(ErrorCode::AsymmetricInput,
                "relative asymmetry " + std::to_string(asym) + " exceeds tolerance");
  Matrix out = 0.5 * (raw + raw.transpose());
  detail::mirror_upper(out);
  return KernelMatrix{std::move(out), view_id};
}

// standard preprocessing: center first, then normalize to unit diagonal
inline KernelMatrix preprocess_kernel(const KernelMatrix& kernel) {
  return normalize_kernel(center_kernel(kernel));
}

inline KernelMatrix average_kernel(const std::vector<KernelMatrix>& kernels) {
  if (kernels.empty()) throw Error(ErrorCode::InvalidInput, "no kernels");
  Matrix sum = kernels[0].values;
  for (std::size_t p = 1; p < kernels.size(); ++p) {
    if (kernels[p].values.rows() != sum.rows())
      throw Error(ErrorCode::InconsistentViews, "kernel sizes differ across views");
    sum += kernels[p].values;
  }
  sum /= static_cast<double>(kernels.size());
  return KernelMatrix{std::move(sum), -1};
}

}  // namespace mvfuse
