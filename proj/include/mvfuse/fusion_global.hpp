#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mvfuse/fusion.hpp"

namespace mvfuse {

namespace detail {

inline void check_fusion_shapes(const std::vector<Partition>& partitions,
                                const RotationSet* rotations, const ViewWeights* beta,
                                const Partition* m) {
  if (partitions.empty()) throw Error(ErrorCode::InvalidInput, "no partitions");
  const Eigen::Index n = partitions[0].n();
  const Eigen::Index k = partitions[0].k();
  for (const Partition& h : partitions)
    if (h.n() != n || h.k() != k)
      throw Error(ErrorCode::InvalidShape, "partitions must share one n x k shape");
  if (rotations) {
    if (rotations->size() != partitions.size())
      throw Error(ErrorCode::InvalidShape, "one rotation per view required");
    for (const Matrix& w : rotations->rotations)
      if (w.rows() != k || w.cols() != k)
        throw Error(ErrorCode::InvalidShape, "rotations must be k x k");
  }
  if (beta && beta->size() != static_cast<Eigen::Index>(partitions.size()))
    throw Error(ErrorCode::InvalidShape, "one weight per view required");
  if (m && (m->n() != n || m->k() != k))
    throw Error(ErrorCode::InvalidShape, "regularizer partition shape mismatch");
}

}  // namespace detail

// Tr(F^T sum_p beta_p H_p W_p) + lambda Tr(F^T M)
inline double gam_objective(const Partition& f, const std::vector<Partition>& partitions,
                            const RotationSet& rotations, const ViewWeights& beta,
                            const Partition& m, double lambda) {
  detail::check_fusion_shapes(partitions, &rotations, &beta, &m);
  if (f.n() != partitions[0].n() || f.k() != partitions[0].k())
    throw Error(ErrorCode::InvalidShape, "consensus partition shape mismatch");
  Matrix b = Matrix::Zero(f.n(), f.k());
  for (std::size_t p = 0; p < partitions.size(); ++p)
    b.noalias() +=
        beta(static_cast<Eigen::Index>(p)) * (partitions[p].matrix * rotations[p]);
  return (f.matrix.array() * b.array()).sum() +
         lambda * (f.matrix.array() * m.matrix.array()).sum();
}

// consensus update: orthonormal maximizer of Tr(F^T U) with
// U = sum_p beta_p H_p W_p + lambda M
inline Partition update_F_global(const std::vector<Partition>& partitions,
                                 const RotationSet& rotations, const ViewWeights& beta,
                                 const Partition& m, double lambda,
                                 bool* rank_deficient = nullptr) {
  detail::check_fusion_shapes(partitions, &rotations, &beta, &m);
  Matrix u = lambda * m.matrix;
  for (std::size_t p = 0; p < partitions.size(); ++p)
    u.noalias() +=
        beta(static_cast<Eigen::Index>(p)) * (partitions[p].matrix * rotations[p]);
  ProcrustesSolution sol = procrustes_maximizer(u);
  if (rank_deficient) *rank_deficient = sol.rank_deficient;
  return Partition{std::move(sol.maximizer), PartitionKind::Consensus};
}

// rotation update for one view: maximizer of Tr(W^T L), L = beta_p H_p^T F
inline Matrix update_W_global(const Partition& h_p, const Partition& f, double beta_p) {
  if (h_p.n() != f.n() || h_p.k() != f.k())
    throw Error(ErrorCode::InvalidShape, "partition shapes mismatch");
  const Matrix l = beta_p * (h_p.matrix.transpose() * f.matrix);
  return procrustes_maximizer(l).maximizer;
}

// full solver: init W_p = I, beta = 1/sqrt(m), sweep F -> {W_p} -> beta until
// the relative objective change drops to eps0 or max_iter is hit
inline FusionResult lf_mvc_gam(const std::vector<Partition>& partitions, const Partition& m,
                               double lambda, double eps0 = 1e-4, int max_iter = 100,
                               bool retain_iterates = false) {
  detail::check_fusion_shapes(partitions, nullptr, nullptr, &m);
  std::vector<Matrix> effective;
  effective.reserve(partitions.size());
  for (const Partition& h : partitions) effective.push_back(h.matrix);
  return detail::solve_alignment(effective, m.matrix, lambda, eps0, max_iter, retain_iterates);
}

}  // namespace mvfuse
