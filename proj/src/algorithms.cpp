#include "cbprior/algorithms.hpp"

#include <algorithm>

#include "cbprior/baselines.hpp"
#include "cbprior/error.hpp"

namespace cbprior {
namespace {

KMeansConfig kmeans_config(const AlgorithmParams& p, KMeansInit init) {
  return {p.k, p.max_iters, p.seed, init, p.tol};
}

}  // namespace

const std::vector<std::string>& algorithm_ids() {
  static const std::vector<std::string> ids = {
      "dcpe", "dcpe-naive", "kmeans", "kmeanspp", "kmeans-balanced", "agg-centroid",
      "kmeans-instance"};
  return ids;
}

bool is_algorithm(std::string_view id) {
  const auto& ids = algorithm_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

bool is_deterministic(std::string_view id) {
  return id == "dcpe" || id == "dcpe-naive" || id == "agg-centroid";
}

AlgorithmOutput run_algorithm(std::string_view id, const Codebook& codebook,
                              const AlgorithmParams& p) {
  if (id == "dcpe") {
    DcpeOptions options;
    options.max_cluster_size = p.max_cluster_size;
    options.metric = p.metric;
    options.argmin = p.argmin;
    options.scan = p.scan;
    auto r = dcpe_optimized(codebook, p.k, options);
    return {std::move(r.assignment), std::move(r.trace)};
  }
  if (id == "dcpe-naive") {
    auto r = dcpe_naive(codebook, p.k, p.metric);
    return {std::move(r.assignment), std::move(r.trace)};
  }
  if (id == "agg-centroid") {
    auto r = agglomerative_centroid(codebook, p.k);
    return {std::move(r.assignment), std::move(r.trace)};
  }
  if (id == "kmeans") return {kmeans(codebook, kmeans_config(p, KMeansInit::random_tokens)), {}};
  if (id == "kmeanspp") return {kmeans(codebook, kmeans_config(p, KMeansInit::plusplus)), {}};
  if (id == "kmeans-balanced") {
    return {kmeans_balanced(codebook, kmeans_config(p, KMeansInit::random_tokens)), {}};
  }
  if (id == "kmeans-instance") {
    return {kmeans_instance_distance(codebook, kmeans_config(p, KMeansInit::random_tokens)), {}};
  }
  throw InvalidArgument("unknown algorithm '" + std::string(id) + "'");
}

std::size_t working_matrix_bytes(std::string_view id, std::size_t n, std::size_t dim,
                                 std::size_t k) {
  if (id == "dcpe") return n * (n - 1) / 2 * sizeof(double);
  if (id == "dcpe-naive") return 0;  // member lists only
  if (id == "agg-centroid") return 2 * n * dim * sizeof(double);
  if (id == "kmeans" || id == "kmeanspp") return k * dim * sizeof(double);
  if (id == "kmeans-balanced") return n * k * (sizeof(double) + sizeof(std::uint32_t));
  if (id == "kmeans-instance") return k * sizeof(double);
  throw InvalidArgument("unknown algorithm '" + std::string(id) + "'");
}

}  // namespace cbprior
