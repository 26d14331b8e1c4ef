#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <limits>

#include "cbprior/baselines.hpp"
#include "cbprior/dcpe.hpp"
#include "cbprior/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace cbprior;
using testutil::as_int;
using testutil::line;
using Blocks = std::vector<std::vector<std::int32_t>>;

namespace {

// Canonical labels of the SSE-minimal partition among `candidates`.
std::vector<int> best_by_sse(const Codebook& cb, const std::vector<std::vector<int>>& candidates) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> arg;
  for (const auto& p : candidates) {
    const double cost = oracle::sse(cb, p);
    if (cost < best) {
      best = cost;
      arg = p;
    }
  }
  return arg;
}

bool canonical(const ClusterAssignment& a) {
  std::int32_t next = 0;
  for (auto l : a.labels()) {
    if (l > next) return false;
    if (l == next) ++next;
  }
  return static_cast<std::size_t>(next) == a.n_clusters();
}

// Two components 20+ scales apart; blocks of sizes n0 and n1.
Codebook separated_pair(std::uint64_t seed, std::size_t n0, std::size_t n1, std::size_t dim) {
  SyntheticSpec spec;
  spec.dim = dim;
  spec.seed = seed;
  std::vector<double> far(dim, 0.0);
  far[0] = 25.0;
  spec.components = {{std::vector<double>(dim, 0.0), 1.0, n0}, {far, 1.0, n1}};
  return generate_synthetic(spec);
}

std::vector<int> block_labels(std::size_t n0, std::size_t n1) {
  std::vector<int> labels(n0, 0);
  labels.insert(labels.end(), n1, 1);
  return labels;
}

}  // namespace

TEST_CASE("kmeans on four points converges to the SSE-optimal split for every seed") {
  const auto cb = line({0.0, 1.0, 10.0, 11.0});
  const auto optimum = best_by_sse(cb, oracle::partitions(4, 2));
  REQUIRE(optimum == std::vector<int>{0, 0, 1, 1});
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    for (auto init : {KMeansInit::random_tokens, KMeansInit::plusplus}) {
      const auto a = kmeans(cb, {2, 100, seed, init, 0.0});
      CHECK(as_int(a.labels()) == optimum);
    }
  }
}

TEST_CASE("kmeans with k = N needs no iterations") {
  KMeansDiagnostics diag;
  const auto a = kmeans(testutil::random_codebook(10, 2, 1), {10, 50, 3}, &diag);
  CHECK(a == ClusterAssignment::identity(10));
  CHECK(diag.iterations == 0);
}

TEST_CASE("kmeans is deterministic for a fixed seed") {
  const auto cb = testutil::random_codebook(200, 4, 2);
  const KMeansConfig config{12, 100, 42};
  CHECK(kmeans(cb, config) == kmeans(cb, config));
  auto pp = config;
  pp.init = KMeansInit::plusplus;
  CHECK(kmeans(cb, pp) == kmeans(cb, pp));
}

TEST_CASE("Lloyd iterations never increase the within-cluster SSE") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto cb = testutil::random_codebook(300, 3, 100 + seed);
    for (auto init : {KMeansInit::random_tokens, KMeansInit::plusplus}) {
      KMeansDiagnostics diag;
      const auto a = kmeans(cb, {20, 200, seed, init, 0.0}, &diag);
      REQUIRE(diag.inertia.size() == diag.iterations);
      for (std::size_t i = 1; i < diag.inertia.size(); ++i) {
        CHECK(diag.inertia[i] <= diag.inertia[i - 1] * (1.0 + 1e-12));
      }
      CHECK(within_cluster_sse(cb, a) <= diag.inertia.back() * (1.0 + 1e-12));
      CHECK(a.n_clusters() == 20);
    }
  }
}

TEST_CASE("kmeans keeps k clusters alive with duplicate tokens") {
  // Seeds can coincide in value; empty clusters must be repaired.
  const auto cb = line({1.0, 1.0, 1.0, 1.0, 5.0, 9.0});
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    CHECK(kmeans(cb, {3, 50, seed}).n_clusters() == 3);
  }
}

TEST_CASE("balanced kmeans: capacity forces the split") {
  const auto cb = line({0.0, 1.0, 2.0, 100.0});
  // Enumerate capacity-feasible (2+2) partitions; the SSE optimum is {0,1},{2,3}
  // even though token 2 is nearer the first group.
  std::vector<std::vector<int>> feasible;
  for (const auto& p : oracle::partitions(4, 2)) {
    if (std::count(p.begin(), p.end(), 0) == 2) feasible.push_back(p);
  }
  REQUIRE(feasible.size() == 3);
  REQUIRE(best_by_sse(cb, feasible) == std::vector<int>{0, 0, 1, 1});
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    CHECK(kmeans_balanced(cb, {2, 100, seed}).members() == Blocks{{0, 1}, {2, 3}});
  }
}

TEST_CASE("balanced kmeans size spread is at most one") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto cb = testutil::random_codebook(101 + seed, 3, seed);
    for (std::size_t k : {1u, 2u, 7u, 10u, 33u}) {
      const auto sizes = kmeans_balanced(cb, {k, 50, seed}).sizes();
      CHECK(sizes.size() == k);
      const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
      CHECK(*hi - *lo <= 1);
    }
  }
  CHECK(kmeans_balanced(line({0.0, 1.0, 2.0}), {1, 10, 0}).n_clusters() == 1);
}

TEST_CASE("centroid linkage on four points") {
  const auto r = agglomerative_centroid(line({0.0, 1.0, 10.0, 11.0}), 1);
  CHECK(r.trace[0] == MergeStep{0, 1, 1.0});
  CHECK(r.trace[1] == MergeStep{2, 3, 1.0});
  CHECK(r.trace[2] == MergeStep{0, 2, 10.0});  // |0.5 - 10.5|
  CHECK(agglomerative_centroid(line({0.0, 1.0, 10.0, 11.0}), 2).assignment.members() ==
        Blocks{{0, 1}, {2, 3}});
  CHECK(agglomerative_centroid(line({3.0, 1.0, 2.0}), 3).assignment ==
        ClusterAssignment::identity(3));
}

TEST_CASE("centroid linkage matches its from-scratch oracle") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto cb = testutil::random_codebook(50, 3, 40 + seed);
    for (std::size_t k : {5u, 12u, 25u}) {
      const auto r = agglomerative_centroid(cb, k);
      const auto o = oracle::centroid_linkage(cb, k);
      REQUIRE(as_int(r.assignment.labels()) == o.labels);
      for (std::size_t s = 0; s < o.trace.size(); ++s) {
        CHECK(r.trace[s].survivor == o.trace[s].survivor);
        CHECK(r.trace[s].absorbed == o.trace[s].absorbed);
        CHECK(r.trace[s].distance == doctest::Approx(o.trace[s].distance).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("centroid and average linkage disagree on a small line") {
  // Found by exhaustive search over random 7-point integer lines with both
  // test oracles; frozen here.
  const auto cb = line({4, 34, 19, 1, 29, 38, 8});
  const auto avg_oracle = oracle::upgma(cb, 2);
  const auto cen_oracle = oracle::centroid_linkage(cb, 2);
  REQUIRE(avg_oracle.labels == std::vector<int>{0, 1, 0, 0, 1, 1, 0});
  REQUIRE(cen_oracle.labels == std::vector<int>{0, 1, 1, 0, 1, 1, 0});
  CHECK(as_int(dcpe_optimized(cb, 2).assignment.labels()) == avg_oracle.labels);
  CHECK(as_int(agglomerative_centroid(cb, 2).assignment.labels()) == cen_oracle.labels);
}

TEST_CASE("instance-distance kmeans on four points") {
  const auto cb = line({0.0, 1.0, 10.0, 11.0});
  // Brute-force mean-distance cost of both candidate 2-splits: the contiguous
  // split is the only one where every token's own cluster is its cheapest.
  auto mean_cost = [&](const std::vector<int>& labels) {
    double total = 0.0;
    for (std::size_t t = 0; t < 4; ++t) {
      double s = 0.0;
      int count = 0;
      for (std::size_t u = 0; u < 4; ++u) {
        if (labels[u] == labels[t]) {
          s += std::abs(cb[t][0] - cb[u][0]);
          ++count;
        }
      }
      total += s / count;
    }
    return total;
  };
  CHECK(mean_cost({0, 0, 1, 1}) < mean_cost({0, 1, 1, 1}));
  CHECK(mean_cost({0, 0, 1, 1}) < mean_cost({0, 1, 0, 1}));
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    CHECK(kmeans_instance_distance(cb, {2, 100, seed}).members() == Blocks{{0, 1}, {2, 3}});
  }
}

TEST_CASE("instance-distance kmeans edge cases") {
  const auto cb = testutil::random_codebook(12, 2, 9);
  CHECK(kmeans_instance_distance(cb, {12, 10, 1}) == ClusterAssignment::identity(12));
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto a = kmeans_instance_distance(cb, {1, 10, seed});
    CHECK(std::all_of(a.labels().begin(), a.labels().end(), [](auto l) { return l == 0; }));
  }
  CHECK(kmeans_instance_distance(testutil::random_codebook(80, 3, 2), {9, 50, 4}).n_clusters() == 9);
}

TEST_CASE("k out of range is rejected") {
  const auto cb = line({0.0, 1.0});
  CHECK_THROWS_AS(kmeans(cb, {3, 10, 0}), InvalidArgument);
  CHECK_THROWS_AS(kmeans(cb, {0, 10, 0}), InvalidArgument);
  CHECK_THROWS_AS(kmeans_balanced(cb, {3, 10, 0}), InvalidArgument);
  CHECK_THROWS_AS(kmeans_instance_distance(cb, {3, 10, 0}), InvalidArgument);
  CHECK_THROWS_AS(agglomerative_centroid(cb, 3), InvalidArgument);
}

TEST_CASE("all baselines emit canonical labels") {
  const auto cb = testutil::random_codebook(90, 4, 17);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    CHECK(canonical(kmeans(cb, {9, 100, seed})));
    CHECK(canonical(kmeans(cb, {9, 100, seed, KMeansInit::plusplus})));
    CHECK(canonical(kmeans_balanced(cb, {9, 100, seed})));
    CHECK(canonical(kmeans_instance_distance(cb, {9, 100, seed})));
  }
  CHECK(canonical(agglomerative_centroid(cb, 9).assignment));
}

TEST_CASE("well-separated mixtures are recovered by every algorithm") {
  // 2 components, 25 units apart at unit scale. Success needed in >= 95% of seeds.
  const std::size_t seeds = 40;
  std::size_t ok_kmeans = 0, ok_pp = 0, ok_balanced = 0, ok_instance = 0, ok_centroid = 0,
              ok_dcpe = 0;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    const auto cb = separated_pair(seed, 30, 18, 4);
    const auto truth = block_labels(30, 18);
    const auto even = separated_pair(seed, 24, 24, 4);
    const auto even_truth = block_labels(24, 24);
    ok_kmeans += as_int(kmeans(cb, {2, 100, seed}).labels()) == truth;
    ok_pp += as_int(kmeans(cb, {2, 100, seed, KMeansInit::plusplus}).labels()) == truth;
    ok_balanced += as_int(kmeans_balanced(even, {2, 100, seed}).labels()) == even_truth;
    ok_instance += as_int(kmeans_instance_distance(cb, {2, 100, seed}).labels()) == truth;
    ok_centroid += as_int(agglomerative_centroid(cb, 2).assignment.labels()) == truth;
    ok_dcpe += as_int(dcpe_optimized(cb, 2).assignment.labels()) == truth;
  }
  const double need = 0.95 * seeds;
  CHECK(ok_kmeans >= need);
  CHECK(ok_pp >= need);
  CHECK(ok_balanced >= need);
  CHECK(ok_instance >= need);
  CHECK(ok_centroid >= need);
  CHECK(ok_dcpe >= need);

  // With more components only D^2 seeding reliably places one seed per blob.
  std::size_t ok_pp4 = 0;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    SyntheticSpec spec;
    spec.dim = 3;
    spec.seed = seed;
    for (int c = 0; c < 4; ++c) spec.components.push_back({{30.0 * c, 0.0, 0.0}, 1.0, 15});
    const auto cb = generate_synthetic(spec);
    std::vector<int> truth;
    for (int c = 0; c < 4; ++c) truth.insert(truth.end(), 15, c);
    ok_pp4 += as_int(kmeans(cb, {4, 100, seed, KMeansInit::plusplus}).labels()) == truth;
    CHECK(as_int(dcpe_optimized(cb, 4).assignment.labels()) == truth);
  }
  CHECK(ok_pp4 >= need);
}
