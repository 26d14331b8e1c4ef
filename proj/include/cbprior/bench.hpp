#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cbprior/algorithms.hpp"
#include "cbprior/codebook.hpp"

namespace cbprior {

struct BenchResult {
  std::string algo;
  std::size_t n_tokens = 0;
  std::size_t dim = 0;
  std::size_t k = 0;
  double wall_time = 0.0;            // median seconds over repeats
  std::vector<double> repeat_times;  // every repeat, in run order
  std::size_t peak_matrix_bytes = 0;
};

// Times each algorithm `repeats` times on the same input, sequentially.
// All ids are validated before anything runs.
std::vector<BenchResult> run_bench(const Codebook& codebook, std::size_t k,
                                   const std::vector<std::string>& algos, std::size_t repeats,
                                   AlgorithmParams params = {});

// Untimed correctness sweep: every algorithm runs once on the same input,
// concurrently, and only deterministic outcome fields are kept.
struct SweepResult {
  std::string algo;
  std::size_t n_tokens = 0;
  std::size_t dim = 0;
  std::size_t k = 0;
  std::size_t n_clusters = 0;
  double mean_intra_pairwise = 0.0;
  double size_std = 0.0;
};

std::vector<SweepResult> run_sweep(const Codebook& codebook, std::size_t k,
                                   const std::vector<std::string>& algos,
                                   AlgorithmParams params = {});

nlohmann::ordered_json to_json(const BenchResult& result);
nlohmann::ordered_json to_json(const SweepResult& result);

double median(std::vector<double> values);

}  // namespace cbprior
