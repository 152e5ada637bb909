#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mvfuse/errors.hpp"
#include "mvfuse/partition.hpp"

namespace mvfuse {

// k_pred x k_true cross-tabulation of two labelings
struct ContingencyTable {
  std::vector<std::vector<long long>> counts;
  long long n = 0;

  std::size_t rows() const { return counts.size(); }
  std::size_t cols() const { return counts.empty() ? 0 : counts[0].size(); }
};

inline ContingencyTable contingency_table(const ClusterLabels& pred, const ClusterLabels& truth) {
  if (pred.size() != truth.size())
    throw Error(ErrorCode::InvalidInput, "label vectors differ in length");
  if (pred.empty()) throw Error(ErrorCode::InvalidInput, "empty label vectors");
  int kp = 0, kt = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || truth[i] < 0) throw Error(ErrorCode::InvalidInput, "negative label");
    kp = std::max(kp, pred[i] + 1);
    kt = std::max(kt, truth[i] + 1);
  }
  ContingencyTable table;
  table.counts.assign(static_cast<std::size_t>(kp),
                      std::vector<long long>(static_cast<std::size_t>(kt), 0));
  table.n = static_cast<long long>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i)
    ++table.counts[static_cast<std::size_t>(pred[i])][static_cast<std::size_t>(truth[i])];
  return table;
}

namespace detail {

// potentials form of the Hungarian algorithm; returns the column matched to
// each row of the square cost matrix, minimizing the total cost
inline std::vector<int> hungarian_min_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, kInf);
    std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = match[static_cast<std::size_t>(j0)];
      int j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                           u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (match[static_cast<std::size_t>(j)] > 0)
      row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return row_to_col;
}

}  // namespace detail

// fraction of samples explained by the best injective cluster-to-class map,
// found by optimal assignment on the zero-padded square contingency table
inline double accuracy(const ClusterLabels& pred, const ClusterLabels& truth) {
  const ContingencyTable table = contingency_table(pred, truth);
  const std::size_t dim = std::max(table.rows(), table.cols());
  std::vector<std::vector<double>> cost(dim, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < table.rows(); ++i)
    for (std::size_t j = 0; j < table.cols(); ++j)
      cost[i][j] = -static_cast<double>(table.counts[i][j]);
  const std::vector<int> row_to_col = detail::hungarian_min_assignment(cost);
  long long matched = 0;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const auto j = static_cast<std::size_t>(row_to_col[i]);
    if (j < table.cols()) matched += table.counts[i][j];
  }
  return static_cast<double>(matched) / static_cast<double>(table.n);
}

// mutual information normalized by the geometric mean of the entropies
// (natural logs); conventions: two zero-entropy partitions are identical
// trivial clusterings and score 1, a single zero-entropy side scores 0
inline double nmi(const ClusterLabels& pred, const ClusterLabels& truth) {
  const ContingencyTable table = contingency_table(pred, truth);
  const double n = static_cast<double>(table.n);
  std::vector<double> row_sum(table.rows(), 0.0);
  std::vector<double> col_sum(table.cols(), 0.0);
  for (std::size_t i = 0; i < table.rows(); ++i)
    for (std::size_t j = 0; j < table.cols(); ++j) {
      row_sum[i] += static_cast<double>(table.counts[i][j]);
      col_sum[j] += static_cast<double>(table.counts[i][j]);
    }
  double h_pred = 0.0, h_truth = 0.0;
  for (const double r : row_sum)
    if (r > 0.0) h_pred -= (r / n) * std::log(r / n);
  for (const double c : col_sum)
    if (c > 0.0) h_truth -= (c / n) * std::log(c / n);
  if (h_pred <= 0.0 && h_truth <= 0.0) return 1.0;
  if (h_pred <= 0.0 || h_truth <= 0.0) return 0.0;
  double mi = 0.0;
  for (std::size_t i = 0; i < table.rows(); ++i)
    for (std::size_t j = 0; j < table.cols(); ++j) {
      const double c = static_cast<double>(table.counts[i][j]);
      if (c > 0.0) mi += (c / n) * std::log((c * n) / (row_sum[i] * col_sum[j]));
    }
  return std::clamp(mi / std::sqrt(h_pred * h_truth), 0.0, 1.0);
}

// average over predicted clusters of the dominant true class fraction
inline double purity(const ClusterLabels& pred, const ClusterLabels& truth) {
  const ContingencyTable table = contingency_table(pred, truth);
  long long dominant = 0;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    long long best = 0;
    for (std::size_t j = 0; j < table.cols(); ++j) best = std::max(best, table.counts[i][j]);
    dominant += best;
  }
  return static_cast<double>(dominant) / static_cast<double>(table.n);
}

}  // namespace mvfuse
