#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "mvfuse/errors.hpp"
#include "mvfuse/kernel.hpp"
#include "mvfuse/rng.hpp"

namespace mvfuse {

enum class PartitionKind { Base, Consensus, Regularizer };

// n x k column-orthonormal relaxed cluster indicator
struct Partition {
  Matrix matrix;
  PartitionKind kind = PartitionKind::Base;

  Eigen::Index n() const { return matrix.rows(); }
  Eigen::Index k() const { return matrix.cols(); }
};

// per-view neighborhood tallies: counts[j] = how many samples have j among
// their tau most similar samples; view_id < 0 marks the average-kernel view
struct NeighborAggregate {
  Vector counts;
  int tau = 0;
  int view_id = 0;
};

using ClusterLabels = std::vector<int>;

namespace detail {

// flip each column so its largest-magnitude entry is positive; first maximal
// index wins so the convention is reproducible across eigensolver backends
inline void canonicalize_column_signs(Matrix& h) {
  for (Eigen::Index c = 0; c < h.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
      const double a = std::abs(h(r, c));
      if (a > best) {
        best = a;
        arg = r;
      }
    }
    if (h(arg, c) < 0.0) h.col(c) = -h.col(c);
  }
}

}  // namespace detail

// k eigenvectors of the largest eigenvalues, columns ordered by descending
// eigenvalue, deterministic sign convention
inline Partition top_k_eigvecs(const KernelMatrix& kernel, int k) {
  const Matrix& m = kernel.values;
  const Eigen::Index n = m.rows();
  if (k < 1 || k > n) throw Error(ErrorCode::InvalidK, "k must be in [1, n]");
  if (!m.allFinite()) throw Error(ErrorCode::InvalidInput, "non-finite kernel entries");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::NumericalFailure, "eigendecomposition did not converge");
  // eigenvalues come back ascending; take the tail in reverse
  Matrix h(n, k);
  for (int j = 0; j < k; ++j) h.col(j) = solver.eigenvectors().col(n - 1 - j);
  detail::canonicalize_column_signs(h);
  return Partition{std::move(h), PartitionKind::Base};
}

inline std::vector<Partition> base_partitions(const std::vector<KernelMatrix>& kernels, int k) {
  if (kernels.empty()) throw Error(ErrorCode::InvalidInput, "no kernels");
  std::vector<Partition> parts;
  parts.reserve(kernels.size());
  for (const auto& kernel : kernels) {
    if (kernel.values.rows() != kernels[0].values.rows())
      throw Error(ErrorCode::InconsistentViews, "kernel sizes differ across views");
    parts.push_back(top_k_eigvecs(kernel, k));
  }
  return parts;
}

inline Partition regularizer_partition(const std::vector<KernelMatrix>& kernels, int k) {
  Partition m = top_k_eigvecs(average_kernel(kernels), k);
  m.kind = PartitionKind::Regularizer;
  return m;
}

// tau nearest neighbors per row by similarity, ties broken by ascending index
inline NeighborAggregate neighbor_aggregate(const KernelMatrix& kernel, int tau) {
  const Matrix& k = kernel.values;
  const Eigen::Index n = k.rows();
  if (tau < 1 || tau > n) throw Error(ErrorCode::InvalidTau, "tau must be in [1, n]");
  Vector counts = Vector::Zero(n);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    const auto row = k.row(i);
    std::partial_sort(idx.begin(), idx.begin() + tau, idx.end(),
                      [&row](Eigen::Index a, Eigen::Index b) {
                        if (row(a) != row(b)) return row(a) > row(b);
                        return a < b;
                      });
    for (Eigen::Index t = 0; t < tau; ++t) counts(idx[static_cast<std::size_t>(t)]) += 1.0;
  }
  return NeighborAggregate{std::move(counts), tau, kernel.view_id};
}

// fraction-of-n tau used by config grids, rounded to nearest and clamped to [1, n]
inline int tau_from_fraction(double fraction, Eigen::Index n) {
  const auto t = static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(n)));
  return static_cast<int>(std::clamp<Eigen::Index>(t, 1, n));
}

namespace detail {

struct LloydRun {
  std::vector<int> labels;
  double inertia = std::numeric_limits<double>::infinity();
};

inline LloydRun lloyd_single(const Matrix& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  constexpr int kMaxSweeps = 300;

  // k-means++ seeding
  Matrix centroids(k, d);
  Vector dist2 = Vector::Constant(n, std::numeric_limits<double>::infinity());
  {
    const auto first = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    centroids.row(0) = x.row(first);
    for (Eigen::Index i = 0; i < n; ++i) dist2(i) = (x.row(i) - centroids.row(0)).squaredNorm();
    for (int c = 1; c < k; ++c) {
      const double total = dist2.sum();
      Eigen::Index pick = 0;
      if (total > 0.0) {
        const double u = rng.uniform() * total;
        double acc = 0.0;
        pick = n - 1;
        for (Eigen::Index i = 0; i < n; ++i) {
          acc += dist2(i);
          if (acc > u) {
            pick = i;
            break;
          }
        }
      } else {
        // all remaining points duplicate an existing center
        pick = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      }
      centroids.row(c) = x.row(pick);
      for (Eigen::Index i = 0; i < n; ++i)
        dist2(i) = std::min(dist2(i), (x.row(i) - centroids.row(c)).squaredNorm());
    }
  }

  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  std::vector<int> prev;
  std::vector<Eigen::Index> size(static_cast<std::size_t>(k), 0);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    prev = assign;
    std::fill(size.begin(), size.end(), Eigen::Index{0});
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (x.row(i) - centroids.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double dc = (x.row(i) - centroids.row(c)).squaredNorm();
        if (dc < best_d) {
          best_d = dc;
          best = c;
        }
      }
      assign[static_cast<std::size_t>(i)] = best;
      ++size[static_cast<std::size_t>(best)];
    }

    // revive empty clusters with the globally farthest point from its centroid,
    // never draining a singleton
    for (int c = 0; c < k; ++c) {
      if (size[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index worst = -1;
      double worst_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int a = assign[static_cast<std::size_t>(i)];
        if (size[static_cast<std::size_t>(a)] < 2) continue;
        const double dc = (x.row(i) - centroids.row(a)).squaredNorm();
        if (dc > worst_d) {
          worst_d = dc;
          worst = i;
        }
      }
      if (worst < 0) continue;  // unreachable for n >= k, kept as a guard
      --size[static_cast<std::size_t>(assign[static_cast<std::size_t>(worst)])];
      assign[static_cast<std::size_t>(worst)] = c;
      ++size[static_cast<std::size_t>(c)];
    }

    centroids.setZero();
    for (Eigen::Index i = 0; i < n; ++i)
      centroids.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
    for (int c = 0; c < k; ++c)
      centroids.row(c) /= static_cast<double>(size[static_cast<std::size_t>(c)]);

    if (assign == prev) break;
  }

  double inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    inertia += (x.row(i) - centroids.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
  return LloydRun{std::move(assign), inertia};
}

}  // namespace detail

// Lloyd's algorithm on the partition rows with k-means++ seeding; the best of
// `restarts` independent runs by within-cluster sum of squares wins, earlier
// restart on ties
inline std::pair<ClusterLabels, double> lloyd_round(const Partition& p, int k, int restarts,
                                                    std::uint64_t seed, bool row_normalize = true) {
  const Eigen::Index n = p.matrix.rows();
  if (k < 1 || k > n) throw Error(ErrorCode::InvalidK, "k must be in [1, n]");
  if (restarts < 1) throw Error(ErrorCode::InvalidInput, "restarts must be >= 1");
  Matrix x = p.matrix;
  if (row_normalize) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double norm = x.row(i).norm();
      if (norm > 0.0) x.row(i) /= norm;
    }
  }
  detail::LloydRun best;
  for (int r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    detail::LloydRun run = detail::lloyd_single(x, k, rng);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return {std::move(best.labels), best.inertia};
}

// thin orthonormal matrix from the QR of a Gaussian draw; R's diagonal signs
// are absorbed so the result is unique given the draw
inline Matrix random_orthonormal(Eigen::Index n, Eigen::Index k, Rng& rng) {
  Matrix g(n, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, k);
  const Matrix r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < k; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace mvfuse
