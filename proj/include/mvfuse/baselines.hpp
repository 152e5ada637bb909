#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "mvfuse/kernel.hpp"
#include "mvfuse/metrics.hpp"
#include "mvfuse/partition.hpp"

namespace mvfuse {

// average-kernel k-means: uniform kernel weights, spectral relaxation, Lloyd rounding
inline std::pair<ClusterLabels, Partition> a_mkkm(const std::vector<KernelMatrix>& kernels, int k,
                                                  int restarts, std::uint64_t seed) {
  Partition h = top_k_eigvecs(average_kernel(kernels), k);
  ClusterLabels labels = lloyd_round(h, k, restarts, seed).first;
  return {std::move(labels), std::move(h)};
}

struct SbKkmViewResult {
  ClusterLabels labels;
  double inertia = 0.0;
  double acc = 0.0;
  double nmi = 0.0;
  double purity = 0.0;
};

struct SbKkmResult {
  std::vector<SbKkmViewResult> per_view;
  int best_view = 0;  // argmax accuracy, lowest index on ties
};

// per-view rounding on precomputed spectral partitions; lets callers amortize
// the eigendecompositions over many restart seeds
inline SbKkmResult sb_kkm_from_partitions(const std::vector<Partition>& partitions, int k,
                                          const ClusterLabels& truth, int restarts,
                                          std::uint64_t seed) {
  if (partitions.empty()) throw Error(ErrorCode::InvalidInput, "no partitions");
  SbKkmResult result;
  result.per_view.reserve(partitions.size());
  for (std::size_t p = 0; p < partitions.size(); ++p) {
    SbKkmViewResult view;
    auto rounded = lloyd_round(partitions[p], k, restarts, derive_seed(seed, p));
    view.labels = std::move(rounded.first);
    view.inertia = rounded.second;
    view.acc = accuracy(view.labels, truth);
    view.nmi = mvfuse::nmi(view.labels, truth);
    view.purity = mvfuse::purity(view.labels, truth);
    if (result.per_view.empty() ||
        view.acc > result.per_view[static_cast<std::size_t>(result.best_view)].acc)
      result.best_view = static_cast<int>(p);
    result.per_view.push_back(std::move(view));
  }
  return result;
}

// single-best-view kernel k-means; supervised selection, so truth is explicit
inline SbKkmResult sb_kkm(const std::vector<KernelMatrix>& kernels, int k,
                          const ClusterLabels& truth, int restarts, std::uint64_t seed) {
  if (kernels.empty()) throw Error(ErrorCode::InvalidInput, "no kernels");
  std::vector<Partition> partitions;
  partitions.reserve(kernels.size());
  for (const KernelMatrix& kernel : kernels) partitions.push_back(top_k_eigvecs(kernel, k));
  return sb_kkm_from_partitions(partitions, k, truth, restarts, seed);
}

struct MkkmState {
  Vector beta;  // probability simplex, not unit sphere
  Partition h;
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  // set when some kernel's residual Tr(K_p (I - H H^T)) dropped to zero or
  // below; that view then takes all the weight and the alternation stops
  bool degenerate_residual = false;
};

// alternating minimization of Tr(K_beta (I - H H^T)) with K_beta = sum beta_p^2 K_p,
// H from the top-k eigenvectors and beta_p proportional to 1/a_p on the simplex
inline MkkmState mkkm(const std::vector<KernelMatrix>& kernels, int k, double eps0 = 1e-4,
                      int max_iter = 100) {
  if (kernels.empty()) throw Error(ErrorCode::InvalidInput, "no kernels");
  if (!(eps0 > 0.0)) throw Error(ErrorCode::InvalidInput, "eps0 must be > 0");
  if (max_iter < 1) throw Error(ErrorCode::InvalidInput, "max_iter must be >= 1");
  const auto m = static_cast<Eigen::Index>(kernels.size());
  const Eigen::Index n = kernels[0].n();
  for (const KernelMatrix& kernel : kernels)
    if (kernel.n() != n) throw Error(ErrorCode::InconsistentViews, "kernel sizes differ");

  Vector kernel_trace(m);
  for (Eigen::Index p = 0; p < m; ++p) kernel_trace(p) = kernels[p].values.trace();

  MkkmState state;
  state.beta = Vector::Constant(m, 1.0 / static_cast<double>(m));
  Vector residual(m);

  auto partition_step = [&]() {
    Matrix combined = Matrix::Zero(n, n);
    for (Eigen::Index p = 0; p < m; ++p)
      combined += (state.beta(p) * state.beta(p)) * kernels[static_cast<std::size_t>(p)].values;
    state.h = top_k_eigvecs(KernelMatrix{std::move(combined), -1}, k);
    for (Eigen::Index p = 0; p < m; ++p)
      residual(p) = kernel_trace(p) -
                    (state.h.matrix.transpose() * kernels[static_cast<std::size_t>(p)].values *
                     state.h.matrix)
                        .trace();
  };

  auto objective = [&]() { return state.beta.array().square().matrix().dot(residual); };

  partition_step();
  state.objective_trace.push_back(objective());

  int t = 0;
  while (t < max_iter) {
    ++t;
    bool degenerate = false;
    for (Eigen::Index p = 0; p < m; ++p) {
      if (residual(p) <= 0.0) {
        state.beta.setZero();
        state.beta(p) = 1.0;  // lowest index wins if several views degenerate
        degenerate = true;
        state.degenerate_residual = true;
        break;
      }
    }
    if (!degenerate) state.beta = residual.cwiseInverse() / residual.cwiseInverse().sum();

    partition_step();
    const double obj = objective();
    const double prev = state.objective_trace.back();
    if (!degenerate && obj > prev + 1e-9 * std::max(1.0, std::abs(prev)))
      throw Error(ErrorCode::NonMonotoneObjective,
                  "objective increased from " + std::to_string(prev) + " to " +
                      std::to_string(obj));
    state.objective_trace.push_back(obj);
    if (degenerate) break;
    if (std::abs(obj - prev) <= eps0 * std::max(std::abs(obj), 1e-300)) {
      state.converged = true;
      break;
    }
  }
  state.iterations = t;
  return state;
}

}  // namespace mvfuse
