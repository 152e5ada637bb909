#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "mvfuse/errors.hpp"
#include "mvfuse/io.hpp"
#include "mvfuse/kernel.hpp"
#include "mvfuse/partition.hpp"
#include "mvfuse/rng.hpp"

namespace mvfuse {

struct SyntheticDataset {
  std::vector<FeatureView> views;
  ClusterLabels labels;
};

namespace detail {

// k centers in [-10,10]^dim with pairwise distance >= min_sep
inline Matrix sample_centers(int k, int dim, double min_sep, Rng& rng) {
  Matrix centers(k, dim);
  for (int c = 0; c < k; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      Vector candidate(dim);
      for (int d = 0; d < dim; ++d) candidate(d) = 20.0 * rng.uniform() - 10.0;
      placed = true;
      for (int prev = 0; prev < c; ++prev)
        if ((centers.row(prev).transpose() - candidate).norm() < min_sep) {
          placed = false;
          break;
        }
      if (placed) centers.row(c) = candidate.transpose();
    }
    if (!placed)
      throw Error(ErrorCode::NumericalFailure, "could not place separated cluster centers");
  }
  return centers;
}

inline Matrix blob_features(const ClusterLabels& labels, const Matrix& centers, double noise_std,
                            Rng& rng) {
  const int n = static_cast<int>(labels.size());
  const int dim = static_cast<int>(centers.cols());
  Matrix x(n, dim);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < dim; ++d) x(i, d) = centers(labels[i], d) + noise_std * rng.gaussian();
  Matrix rotation = random_orthonormal(dim, dim, rng);
  return x * rotation.transpose();
}

}  // namespace detail

// m Gaussian-blob views sharing one labeling; when noise_view is set an extra
// view is appended whose blobs follow a shuffled copy of the labels, so its
// structure carries no information about the true classes
inline SyntheticDataset make_synthetic_data(int n, int k, int m, bool noise_view,
                                            std::uint64_t seed, double separation = 6.0,
                                            double noise_std = 1.0) {
  if (k < 2) throw Error(ErrorCode::InvalidK, "need at least two clusters");
  if (n < 2 * k) throw Error(ErrorCode::InvalidInput, "need at least two samples per cluster");
  if (m < 1) throw Error(ErrorCode::InvalidInput, "need at least one view");
  SyntheticDataset data;
  data.labels.resize(n);
  for (int i = 0; i < n; ++i) data.labels[i] = i % k;

  for (int v = 0; v < m; ++v) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(v)));
    const int dim = 2 + static_cast<int>(rng.uniform_index(4));
    Matrix centers = detail::sample_centers(k, dim, separation, rng);
    data.views.push_back({detail::blob_features(data.labels, centers, noise_std, rng), v});
  }
  if (noise_view) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(m)));
    ClusterLabels shuffled = data.labels;
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
      std::swap(shuffled[i], shuffled[j]);
    }
    const int dim = 2 + static_cast<int>(rng.uniform_index(4));
    Matrix centers = detail::sample_centers(k, dim, separation, rng);
    data.views.push_back({detail::blob_features(shuffled, centers, noise_std, rng), m});
  }
  return data;
}

// writes view_<p>.csv per view plus labels.csv; returns the dataset
inline SyntheticDataset make_synthetic(const std::string& dir, int n, int k, int m,
                                       bool noise_view, std::uint64_t seed,
                                       double separation = 6.0, double noise_std = 1.0) {
  SyntheticDataset data = make_synthetic_data(n, k, m, noise_view, seed, separation, noise_std);
  std::filesystem::create_directories(dir);
  for (std::size_t v = 0; v < data.views.size(); ++v) {
    const std::string path = dir + "/view_" + std::to_string(v) + ".csv";
    write_matrix_csv(path, data.views[v].data);
  }
  write_labels_csv(dir + "/labels.csv", data.labels);
  return data;
}

}  // namespace mvfuse
