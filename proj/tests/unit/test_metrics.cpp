#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "mvfuse/metrics.hpp"
#include "mvfuse/rng.hpp"
#include "test_util.hpp"

using mvfuse::accuracy;
using mvfuse::ClusterLabels;
using mvfuse::Error;
using mvfuse::nmi;
using mvfuse::purity;
using mvfuse::Rng;

TEST_CASE("perfect predictions score one on all metrics") {
  const ClusterLabels truth{0, 0, 1, 1, 2, 2};
  REQUIRE(accuracy(truth, truth) == 1.0);
  REQUIRE(nmi(truth, truth) == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(purity(truth, truth) == 1.0);
}

TEST_CASE("hand-checked nine-sample case") {
  const ClusterLabels truth{0, 0, 0, 1, 1, 1, 2, 2, 2};
  const ClusterLabels pred{0, 0, 0, 1, 1, 2, 2, 2, 1};
  REQUIRE(accuracy(pred, truth) == Catch::Approx(7.0 / 9.0).epsilon(1e-12));
  REQUIRE(purity(pred, truth) == Catch::Approx(7.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("hand-checked purity 0.7 case") {
  // cluster 0 holds {0,0,0,1}, cluster 1 holds {1,1,2}, cluster 2 holds {2,2,0}
  const ClusterLabels pred{0, 0, 0, 0, 1, 1, 1, 2, 2, 2};
  const ClusterLabels truth{0, 0, 0, 1, 1, 1, 2, 2, 2, 0};
  REQUIRE(purity(pred, truth) == Catch::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("metrics are invariant to relabeling the prediction") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_index(4));
    const std::size_t n = 10 + rng.uniform_index(30);
    const ClusterLabels truth = testutil::random_labels(n, k, rng);
    const ClusterLabels pred = testutil::random_labels(n, k, rng);
    // rotate prediction labels by one
    ClusterLabels rotated(n);
    for (std::size_t i = 0; i < n; ++i) rotated[i] = (pred[i] + 1) % k;
    REQUIRE(accuracy(rotated, truth) == Catch::Approx(accuracy(pred, truth)).epsilon(1e-12));
    REQUIRE(nmi(rotated, truth) == Catch::Approx(nmi(pred, truth)).margin(1e-12));
    REQUIRE(purity(rotated, truth) == Catch::Approx(purity(pred, truth)).epsilon(1e-12));
  }
}

TEST_CASE("optimal assignment accuracy equals exhaustive search") {
  Rng rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    const int kp = 2 + static_cast<int>(rng.uniform_index(5));
    const int kt = 2 + static_cast<int>(rng.uniform_index(5));
    const std::size_t n = 5 + rng.uniform_index(36);
    const ClusterLabels truth = testutil::random_labels(n, kt, rng);
    const ClusterLabels pred = testutil::random_labels(n, kp, rng);
    REQUIRE(accuracy(pred, truth) ==
            Catch::Approx(testutil::brute_force_accuracy(pred, truth)).epsilon(1e-12));
  }
}

TEST_CASE("accuracy is symmetric in its arguments") {
  Rng rng(78);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 6 + rng.uniform_index(25);
    const ClusterLabels a = testutil::random_labels(n, 4, rng);
    const ClusterLabels b = testutil::random_labels(n, 3, rng);
    REQUIRE(accuracy(a, b) == Catch::Approx(accuracy(b, a)).epsilon(1e-12));
    REQUIRE(nmi(a, b) == Catch::Approx(nmi(b, a)).margin(1e-12));
  }
}

TEST_CASE("mutual information conventions on degenerate partitions") {
  const ClusterLabels constant{0, 0, 0, 0, 0, 0, 0, 0};
  const ClusterLabels mixed{0, 1, 0, 1, 0, 1, 0, 1};
  // both sides trivial: identical trivial clusterings
  REQUIRE(nmi(constant, constant) == 1.0);
  // one side trivial: no information either way
  REQUIRE(nmi(constant, mixed) == 0.0);
  REQUIRE(nmi(mixed, constant) == 0.0);
  // independent balanced partitions share no information
  const ClusterLabels half{0, 0, 0, 0, 1, 1, 1, 1};
  REQUIRE(nmi(half, mixed) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("nmi agrees with a direct formula evaluation") {
  const ClusterLabels truth{0, 0, 0, 1, 1, 1};
  const ClusterLabels pred{0, 0, 1, 1, 1, 1};
  // contingency: [2 0; 1 3], n = 6
  const double n = 6.0;
  auto plogp = [](double p) { return p > 0.0 ? p * std::log(p) : 0.0; };
  const double h_pred = -(plogp(2.0 / n) + plogp(4.0 / n));
  const double h_truth = -(plogp(3.0 / n) + plogp(3.0 / n));
  double mi = 0.0;
  mi += (2.0 / n) * std::log((2.0 * n) / (2.0 * 3.0));
  mi += (1.0 / n) * std::log((1.0 * n) / (4.0 * 3.0));
  mi += (3.0 / n) * std::log((3.0 * n) / (4.0 * 3.0));
  REQUIRE(nmi(pred, truth) == Catch::Approx(mi / std::sqrt(h_pred * h_truth)).epsilon(1e-12));
}

TEST_CASE("metric input validation") {
  REQUIRE_THROWS_AS(accuracy({0, 1}, {0, 1, 2}), Error);
  REQUIRE_THROWS_AS(accuracy({}, {}), Error);
  REQUIRE_THROWS_AS(accuracy({0, -1}, {0, 1}), Error);
  REQUIRE_THROWS_AS(nmi({0, 1}, {0}), Error);
  REQUIRE_THROWS_AS(purity({}, {}), Error);
}

TEST_CASE("purity of a single cluster equals the dominant class share") {
  const ClusterLabels pred{0, 0, 0, 0, 0};
  const ClusterLabels truth{0, 0, 0, 1, 2};
  REQUIRE(purity(pred, truth) == Catch::Approx(0.6).epsilon(1e-12));
}
