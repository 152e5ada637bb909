#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mvfuse/fusion.hpp"
#include "mvfuse/fusion_global.hpp"

namespace mvfuse {

struct LocalFusionConfig {
  double lambda = 1.0;
  double tau_fraction = 0.5;  // neighbors as a fraction of n
  double eps0 = 1e-4;
  int max_iter = 100;
  bool retain_iterates = false;
};

inline void validate_local_fusion_config(const LocalFusionConfig& config) {
  if (!(config.lambda >= 0.0)) throw Error(ErrorCode::InvalidInput, "lambda must be >= 0");
  if (!(config.tau_fraction > 0.0 && config.tau_fraction <= 1.0))
    throw Error(ErrorCode::InvalidTau, "tau_fraction must be in (0, 1]");
  if (!(config.eps0 > 0.0)) throw Error(ErrorCode::InvalidInput, "eps0 must be > 0");
  if (config.max_iter < 1) throw Error(ErrorCode::InvalidInput, "max_iter must be >= 1");
}

// neighbor-count summaries per view plus the count-scaled regularizer
struct LocalAggregates {
  std::vector<NeighborAggregate> per_view;
  NeighborAggregate average_view;
  Matrix m_tilde;  // diag(average_view.counts) * M
};

inline LocalAggregates build_local_aggregates(const std::vector<KernelMatrix>& kernels,
                                              const Partition& m, int tau) {
  if (kernels.empty()) throw Error(ErrorCode::InvalidInput, "no kernels");
  LocalAggregates agg;
  agg.per_view.reserve(kernels.size());
  for (const KernelMatrix& kernel : kernels) agg.per_view.push_back(neighbor_aggregate(kernel, tau));
  agg.average_view = neighbor_aggregate(average_kernel(kernels), tau);
  agg.average_view.view_id = -1;
  if (m.n() != kernels[0].n())
    throw Error(ErrorCode::InvalidShape, "regularizer partition does not match kernel size");
  agg.m_tilde = agg.average_view.counts.asDiagonal() * m.matrix;
  return agg;
}

// consensus update with neighbor-count weighting:
// U = sum_p beta_p diag(counts_p) H_p W_p + lambda M_tilde
inline Partition update_F_local(const std::vector<Partition>& partitions,
                                const RotationSet& rotations, const ViewWeights& beta,
                                const LocalAggregates& aggregates, double lambda,
                                bool* rank_deficient = nullptr) {
  detail::check_fusion_shapes(partitions, &rotations, &beta, nullptr);
  if (aggregates.per_view.size() != partitions.size())
    throw Error(ErrorCode::InvalidShape, "one neighbor aggregate per view required");
  Matrix u = lambda * aggregates.m_tilde;
  for (std::size_t p = 0; p < partitions.size(); ++p)
    u.noalias() += beta(static_cast<Eigen::Index>(p)) *
                   (aggregates.per_view[p].counts.asDiagonal() *
                    (partitions[p].matrix * rotations[p]));
  ProcrustesSolution sol = procrustes_maximizer(u);
  if (rank_deficient) *rank_deficient = sol.rank_deficient;
  return Partition{std::move(sol.maximizer), PartitionKind::Consensus};
}

// rotation update with neighbor-count weighting: L = beta_p H_p^T diag(counts_p) F
inline Matrix update_W_local(const Partition& h_p, const Partition& f, double beta_p,
                             const NeighborAggregate& counts_p) {
  if (h_p.n() != f.n() || h_p.k() != f.k())
    throw Error(ErrorCode::InvalidShape, "partition shapes mismatch");
  if (counts_p.counts.size() != h_p.n())
    throw Error(ErrorCode::InvalidShape, "neighbor counts length mismatch");
  const Matrix l =
      beta_p * (h_p.matrix.transpose() * (counts_p.counts.asDiagonal() * f.matrix));
  return procrustes_maximizer(l).maximizer;
}

// weight update: delta_p = Tr(F^T diag(counts_p) H_p W_p), then clamp and normalize
inline ViewWeights update_beta_local(const std::vector<Partition>& partitions,
                                     const RotationSet& rotations, const Partition& f,
                                     const LocalAggregates& aggregates) {
  detail::check_fusion_shapes(partitions, &rotations, nullptr, nullptr);
  Vector delta(static_cast<Eigen::Index>(partitions.size()));
  for (std::size_t p = 0; p < partitions.size(); ++p) {
    const Matrix scaled =
        aggregates.per_view[p].counts.asDiagonal() * (partitions[p].matrix * rotations[p]);
    delta(static_cast<Eigen::Index>(p)) = (f.matrix.array() * scaled.array()).sum();
  }
  return update_beta(delta);
}

// alternating loop on already-built partitions and aggregates; lets callers
// reuse the expensive spectral work across a lambda/tau grid
inline FusionResult lf_mvc_lam_with(const std::vector<Partition>& partitions,
                                    const LocalAggregates& aggregates, double lambda, double eps0,
                                    int max_iter, bool retain_iterates = false) {
  detail::check_fusion_shapes(partitions, nullptr, nullptr, nullptr);
  if (aggregates.per_view.size() != partitions.size())
    throw Error(ErrorCode::InvalidShape, "one neighbor aggregate per view required");
  std::vector<Matrix> effective;
  effective.reserve(partitions.size());
  for (std::size_t p = 0; p < partitions.size(); ++p)
    effective.push_back(aggregates.per_view[p].counts.asDiagonal() * partitions[p].matrix);
  return detail::solve_alignment(effective, aggregates.m_tilde, lambda, eps0, max_iter,
                                 retain_iterates);
}

// full pipeline on preprocessed kernels: base partitions, average-kernel
// regularizer, neighbor aggregates, then the alternating alignment loop
inline FusionResult lf_mvc_lam(const std::vector<KernelMatrix>& kernels, int k,
                               const LocalFusionConfig& config) {
  validate_local_fusion_config(config);
  std::vector<Partition> partitions = base_partitions(kernels, k);
  Partition m = regularizer_partition(kernels, k);
  const int tau = tau_from_fraction(config.tau_fraction, kernels[0].n());
  LocalAggregates aggregates = build_local_aggregates(kernels, m, tau);
  return lf_mvc_lam_with(partitions, aggregates, config.lambda, config.eps0, config.max_iter,
                         config.retain_iterates);
}

}  // namespace mvfuse
