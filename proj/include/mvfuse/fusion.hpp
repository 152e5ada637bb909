#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "mvfuse/errors.hpp"
#include "mvfuse/partition.hpp"
#include "mvfuse/procrustes.hpp"

namespace mvfuse {

// m orthogonal k x k matrices aligning the base partitions to the consensus
struct RotationSet {
  std::vector<Matrix> rotations;

  std::size_t size() const { return rotations.size(); }
  const Matrix& operator[](std::size_t p) const { return rotations[p]; }
};

// nonnegative view weights with unit Euclidean norm
using ViewWeights = Vector;

struct IterateSnapshot {
  Matrix f;
  std::vector<Matrix> rotations;
  Vector beta;
};

struct FusionResult {
  Partition f;
  RotationSet rotations;
  ViewWeights beta;
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  bool rank_deficient_u = false;
  // per-trace-entry solver state, kept only when requested; entry 0 is the
  // initialization, entry t the state after iteration t
  std::vector<IterateSnapshot> iterates;
};

// weights below this are treated as switched-off views: their rotation
// subproblem is degenerate (zero matrix), so the previous rotation is kept
inline constexpr double kInactiveWeight = 1e-300;

inline ViewWeights update_beta(const Vector& delta) {
  Vector clamped = delta.cwiseMax(0.0);
  const double norm = clamped.norm();
  if (!(norm > 0.0))
    throw Error(ErrorCode::DegenerateDelta, "no view has positive alignment with the consensus");
  return clamped / norm;
}

namespace detail {

// Alternating maximization of Tr(F^T sum_p beta_p G_p W_p) + lambda Tr(F^T M)
// over orthonormal F, orthogonal W_p and unit-norm nonnegative beta. G_p are
// "effective" base partitions: the raw H_p for the global solver, the
// neighbor-count-scaled D_p H_p for the local one; M is scaled the same way.
// Each subproblem is solved exactly, so the objective never decreases. All
// per-iteration work is O(m n k^2) in n x k products; nothing touches an
// n x n matrix inside the loop.
inline FusionResult solve_alignment(const std::vector<Matrix>& effective, const Matrix& m_eff,
                                    double lambda, double eps0, int max_iter,
                                    bool retain_iterates) {
  const std::size_t m = effective.size();
  if (m == 0) throw Error(ErrorCode::InvalidInput, "no views");
  const Eigen::Index n = effective[0].rows();
  const Eigen::Index k = effective[0].cols();
  for (const Matrix& g : effective)
    if (g.rows() != n || g.cols() != k)
      throw Error(ErrorCode::InvalidShape, "effective partitions must share one n x k shape");
  if (m_eff.rows() != n || m_eff.cols() != k)
    throw Error(ErrorCode::InvalidShape, "regularizer partition shape mismatch");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidInput, "lambda must be >= 0");
  if (!(eps0 > 0.0)) throw Error(ErrorCode::InvalidInput, "eps0 must be > 0");
  if (max_iter < 1) throw Error(ErrorCode::InvalidInput, "max_iter must be >= 1");

  FusionResult result;
  result.rotations.rotations.assign(m, Matrix::Identity(k, k));
  result.beta = Vector::Constant(static_cast<Eigen::Index>(m),
                                 1.0 / std::sqrt(static_cast<double>(m)));

  Matrix f;
  Vector delta(static_cast<Eigen::Index>(m));

  auto consensus_step = [&]() {
    Matrix u = lambda * m_eff;
    for (std::size_t p = 0; p < m; ++p)
      u.noalias() += result.beta(static_cast<Eigen::Index>(p)) *
                     (effective[p] * result.rotations.rotations[p]);
    ProcrustesSolution sol = procrustes_maximizer(u);
    if (sol.rank_deficient) result.rank_deficient_u = true;
    f = std::move(sol.maximizer);
  };

  // per-view alignments delta_p = Tr(F^T G_p W_p), optionally refreshing the
  // rotation of every active view first (both consume the same T_p = G_p^T F)
  auto view_pass = [&](bool refresh_rotations) {
    for (std::size_t p = 0; p < m; ++p) {
      const Matrix t_p = effective[p].transpose() * f;
      const double beta_p = result.beta(static_cast<Eigen::Index>(p));
      if (refresh_rotations && beta_p > kInactiveWeight)
        result.rotations.rotations[p] = procrustes_maximizer(beta_p * t_p).maximizer;
      delta(static_cast<Eigen::Index>(p)) =
          (t_p.array() * result.rotations.rotations[p].array()).sum();
    }
  };

  auto objective = [&]() {
    const double reg = lambda > 0.0 ? lambda * (f.array() * m_eff.array()).sum() : 0.0;
    return result.beta.dot(delta) + reg;
  };

  auto snapshot = [&]() {
    if (retain_iterates)
      result.iterates.push_back(IterateSnapshot{f, result.rotations.rotations, result.beta});
  };

  consensus_step();
  view_pass(false);
  result.objective_trace.push_back(objective());
  snapshot();

  int t = 0;
  while (t < max_iter) {
    ++t;
    consensus_step();
    view_pass(true);
    result.beta = update_beta(delta);

    const double obj = objective();
    const double prev = result.objective_trace.back();
    if (obj < prev - 1e-9 * std::max(1.0, std::abs(prev)))
      throw Error(ErrorCode::NonMonotoneObjective,
                  "objective decreased from " + std::to_string(prev) + " to " +
                      std::to_string(obj));
    result.objective_trace.push_back(obj);
    snapshot();
    if (std::abs(obj - prev) <= eps0 * std::max(std::abs(obj), 1e-300)) {
      result.converged = true;
      break;
    }
  }

  result.iterations = t;
  result.f = Partition{std::move(f), PartitionKind::Consensus};
  return result;
}

}  // namespace detail

}  // namespace mvfuse
