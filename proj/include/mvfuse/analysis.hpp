#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "mvfuse/errors.hpp"
#include "mvfuse/fusion.hpp"
#include "mvfuse/fusion_global.hpp"

namespace mvfuse {

// slack convention for proved inequalities: absolute tolerance scaled by magnitude
inline double bound_slack(double magnitude, double base = 1e-8) {
  return base * std::max(1.0, std::abs(magnitude));
}

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// Tr(P)^2 <= k Tr(P^T P) for any square P
inline InequalityCheck lemma1_check(const Matrix& p) {
  if (p.rows() != p.cols()) throw Error(ErrorCode::InvalidShape, "matrix must be square");
  const double tr = p.trace();
  InequalityCheck check;
  check.lhs = tr * tr;
  check.rhs = static_cast<double>(p.rows()) * (p.array() * p.array()).sum();
  check.holds = check.lhs <= check.rhs + 1e-9 * std::max(1.0, check.rhs);
  return check;
}

// Tr(B B^T) <= m^2 k for B = sum_p beta_p H_p W_p with unit-norm nonnegative beta
inline InequalityCheck lemma2_check(const std::vector<Partition>& partitions,
                                    const RotationSet& rotations, const ViewWeights& beta) {
  detail::check_fusion_shapes(partitions, &rotations, &beta, nullptr);
  const Eigen::Index n = partitions[0].n();
  const Eigen::Index k = partitions[0].k();
  Matrix b = Matrix::Zero(n, k);
  for (std::size_t p = 0; p < partitions.size(); ++p)
    b.noalias() += beta(static_cast<Eigen::Index>(p)) * (partitions[p].matrix * rotations[p]);
  const double m = static_cast<double>(partitions.size());
  InequalityCheck check;
  check.lhs = (b.array() * b.array()).sum();  // Tr(B B^T)
  check.rhs = m * m * static_cast<double>(k);
  check.holds = check.lhs <= check.rhs + bound_slack(check.rhs);
  return check;
}

// alignment-term bound (k/2)(m^2+1) plus regularizer bound lambda k
inline double theorem4_bound(int m, int k, double lambda) {
  if (m < 1 || k < 1) throw Error(ErrorCode::InvalidInput, "m and k must be >= 1");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidInput, "lambda must be >= 0");
  const double md = static_cast<double>(m);
  const double kd = static_cast<double>(k);
  return 0.5 * kd * (md * md + 1.0) + lambda * kd;
}

// excess-risk style bound: sqrt(pi/2) k / sqrt(n) + 8 m sqrt(ln(1/delta) / (2n))
inline double generalization_bound(long long n, int m, int k, double delta) {
  if (n < 1) throw Error(ErrorCode::InvalidInput, "n must be >= 1");
  if (m < 1 || k < 1) throw Error(ErrorCode::InvalidInput, "m and k must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw Error(ErrorCode::InvalidDelta, "delta must lie in (0, 1)");
  const double nd = static_cast<double>(n);
  return std::sqrt(1.5707963267948966) * static_cast<double>(k) / std::sqrt(nd) +
         8.0 * static_cast<double>(m) * std::sqrt(std::log(1.0 / delta) / (2.0 * nd));
}

// consensus-update consistency: at the maximizer F of Tr(F^T U), the rotated
// overlap Q = V^T F^T S is the identity on U's singular basis, so Tr(Q Sigma)
// recovers the singular value sum and every singular value is nonnegative
inline bool theorem3_check(const Matrix& u) {
  Eigen::JacobiSVD<Matrix> svd(u, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Matrix f = svd.matrixU() * svd.matrixV().transpose();
  const Matrix q = svd.matrixV().transpose() * f.transpose() * svd.matrixU();
  const Vector& sigma = svd.singularValues();
  if ((sigma.array() < -1e-10).any()) return false;
  const double lhs = (q * sigma.asDiagonal()).trace();
  return std::abs(lhs - sigma.sum()) <= bound_slack(sigma.sum());
}

inline bool theorem3_check(const std::vector<Partition>& partitions, const RotationSet& rotations,
                           const ViewWeights& beta, const Partition& m, double lambda) {
  detail::check_fusion_shapes(partitions, &rotations, &beta, &m);
  Matrix u = lambda * m.matrix;
  for (std::size_t p = 0; p < partitions.size(); ++p)
    u.noalias() += beta(static_cast<Eigen::Index>(p)) * (partitions[p].matrix * rotations[p]);
  return theorem3_check(u);
}

// per-iteration chain obj1 <= obj2 <= obj3 relating the alignment objective to
// its spectral relaxation and the worst-case bound:
//   obj1 = Tr(B B^T) - Tr(F^T B B^T F)
//   obj2 = Tr(B B^T) - (1/k) Tr^2(F^T B)
//   obj3 = m^2 k    - (1/k) Tr^2(F^T B)
struct GapTraceEntry {
  double obj1 = 0.0;
  double obj2 = 0.0;
  double obj3 = 0.0;
};

struct GapTrace {
  std::vector<GapTraceEntry> entries;
};

inline GapTrace gap_trace(const FusionResult& run, const std::vector<Partition>& partitions,
                          const Partition& m, double lambda) {
  if (run.iterates.empty())
    throw Error(ErrorCode::MissingTrace, "solver run did not retain iterates");
  detail::check_fusion_shapes(partitions, nullptr, nullptr, &m);
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidInput, "lambda must be >= 0");
  const Eigen::Index k = partitions[0].k();
  const double md = static_cast<double>(partitions.size());
  GapTrace trace;
  trace.entries.reserve(run.iterates.size());
  for (const IterateSnapshot& it : run.iterates) {
    if (it.rotations.size() != partitions.size())
      throw Error(ErrorCode::InvalidShape, "snapshot rotation count mismatch");
    Matrix b = Matrix::Zero(partitions[0].n(), k);
    for (std::size_t p = 0; p < partitions.size(); ++p)
      b.noalias() += it.beta(static_cast<Eigen::Index>(p)) * (partitions[p].matrix * it.rotations[p]);
    const double bb = (b.array() * b.array()).sum();
    const double fb = (it.f.array() * b.array()).sum();
    const Matrix ftb_full = b.transpose() * it.f;  // k x k, for Tr(F^T B B^T F)
    const double fbbf = (ftb_full.array() * ftb_full.array()).sum();
    GapTraceEntry entry;
    entry.obj1 = bb - fbbf;
    entry.obj2 = bb - fb * fb / static_cast<double>(k);
    entry.obj3 = md * md * static_cast<double>(k) - fb * fb / static_cast<double>(k);
    if (entry.obj1 > entry.obj2 + bound_slack(entry.obj2) ||
        entry.obj2 > entry.obj3 + bound_slack(entry.obj3))
      throw Error(ErrorCode::NumericalFailure, "objective gap chain violated");
    trace.entries.push_back(entry);
  }
  return trace;
}

}  // namespace mvfuse
