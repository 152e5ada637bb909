#pragma once

#include <Eigen/Dense>
#include <utility>

#include "mvfuse/errors.hpp"
#include "mvfuse/kernel.hpp"

namespace mvfuse {

// solution of max Tr(X^T A) over column-orthonormal X, by SVD of A
struct ProcrustesSolution {
  Matrix maximizer;       // S G^T, same shape as A
  double trace_value;     // sum of A's singular values = Tr(maximizer^T A)
  double min_singular;    // smallest singular value, for rank diagnostics
  bool rank_deficient;    // true when A's columns do not span a full rank-k space
};

inline constexpr double kRankDeficiencyTol = 1e-10;

inline ProcrustesSolution procrustes_maximizer(const Matrix& a) {
  if (a.rows() < a.cols())
    throw Error(ErrorCode::InvalidShape, "procrustes input must have rows >= cols");
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double sv_max = sv.size() > 0 ? sv(0) : 0.0;
  const double sv_min = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;
  // Eigen completes the left basis with orthonormal null-space vectors when
  // singular values vanish, so the maximizer stays orthonormal either way
  Matrix x = svd.matrixU() * svd.matrixV().transpose();
  return ProcrustesSolution{std::move(x), sv.sum(), sv_min,
                            sv_min <= kRankDeficiencyTol * std::max(1.0, sv_max)};
}

}  // namespace mvfuse
