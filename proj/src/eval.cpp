#include "cbprior/eval.hpp"

#include <cmath>
#include <string>

#include "cbprior/distance.hpp"
#include "cbprior/error.hpp"
#include "cbprior/quantizer.hpp"
#include "cbprior/remap.hpp"
#include "cbprior/rng.hpp"

namespace cbprior {

ClusterQualityReport quality_report(const Codebook& codebook, const ClusterAssignment& assignment) {
  if (assignment.n_tokens() != codebook.size()) {
    throw InvalidArgument("quality_report: assignment covers " +
                          std::to_string(assignment.n_tokens()) + " tokens, codebook has " +
                          std::to_string(codebook.size()));
  }
  ClusterQualityReport report;
  report.n_clusters = assignment.n_clusters();
  report.n_tokens = assignment.n_tokens();

  double intra_total = 0.0;
  for (const auto& members : assignment.members()) {
    ++report.size_histogram[members.size()];
    if (members.size() < 2) continue;
    double pair_sum = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        pair_sum += euclidean(codebook[members[i]], codebook[members[j]]);
      }
    }
    const double pairs = 0.5 * static_cast<double>(members.size()) *
                         static_cast<double>(members.size() - 1);
    intra_total += pair_sum / pairs;
  }
  const auto k = static_cast<double>(report.n_clusters);
  report.mean_intra_pairwise = intra_total / k;

  const double mean_size = static_cast<double>(report.n_tokens) / k;
  double var = 0.0;
  for (const auto& [size, count] : report.size_histogram) {
    const double diff = static_cast<double>(size) - mean_size;
    var += static_cast<double>(count) * diff * diff;
  }
  report.size_std = std::sqrt(var / k);
  return report;
}

double replacement_distortion(const Codebook& codebook, const ClusterAssignment& assignment,
                              const Matrix& queries, std::uint64_t seed, std::size_t trials) {
  if (trials < 1) throw InvalidArgument("replacement_distortion: trials must be >= 1");
  if (queries.rows() == 0) throw InvalidArgument("replacement_distortion: no queries");
  if (assignment.n_tokens() != codebook.size()) {
    throw InvalidArgument("replacement_distortion: assignment does not match codebook size");
  }
  const auto quantized = quantize(queries, codebook);
  const auto clusters = remap_to_clusters(quantized.indices, assignment);
  double total = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto replaced = decode_random_selection(clusters, assignment, derive_seed(seed, t));
    for (std::size_t i = 0; i < replaced.size(); ++i) {
      total += euclidean(codebook[quantized.indices[i]], codebook[replaced[i]]);
    }
  }
  return total / (static_cast<double>(queries.rows()) * static_cast<double>(trials));
}

}  // namespace cbprior
