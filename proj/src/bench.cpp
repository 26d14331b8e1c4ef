#include "cbprior/bench.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <iostream>

#include "cbprior/error.hpp"
#include "cbprior/eval.hpp"
#include "cbprior/parallel.hpp"

namespace cbprior {

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<BenchResult> run_bench(const Codebook& codebook, std::size_t k,
                                   const std::vector<std::string>& algos, std::size_t repeats,
                                   AlgorithmParams params) {
  if (repeats < 1) throw InvalidArgument("run_bench: repeats must be >= 1");
  for (const auto& id : algos) {
    if (!is_algorithm(id)) throw InvalidArgument("run_bench: unknown algorithm '" + id + "'");
  }
  params.k = k;
  std::vector<BenchResult> results;
  for (const auto& id : algos) {
    BenchResult r;
    r.algo = id;
    r.n_tokens = codebook.size();
    r.dim = codebook.dim();
    r.k = k;
    r.peak_matrix_bytes = working_matrix_bytes(id, codebook.size(), codebook.dim(), k);
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      const auto start = std::chrono::steady_clock::now();
      const auto out = run_algorithm(id, codebook, params);
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      // Clamp to a positive value: timer resolution can report 0 for tiny inputs.
      r.repeat_times.push_back(std::max(elapsed.count(), 1e-9));
      std::clog << "[bench] " << id << " repeat " << rep + 1 << "/" << repeats << ": "
                << r.repeat_times.back() << " s (" << out.assignment.n_clusters()
                << " clusters)\n";
    }
    r.wall_time = median(r.repeat_times);
    results.push_back(std::move(r));
  }
  return results;
}

std::vector<SweepResult> run_sweep(const Codebook& codebook, std::size_t k,
                                   const std::vector<std::string>& algos, AlgorithmParams params) {
  for (const auto& id : algos) {
    if (!is_algorithm(id)) throw InvalidArgument("run_sweep: unknown algorithm '" + id + "'");
  }
  params.k = k;
  std::vector<SweepResult> results(algos.size());
  std::vector<std::exception_ptr> errors(algos.size());
  parallel_for(
      algos.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          try {
            const auto out = run_algorithm(algos[i], codebook, params);
            const auto report = quality_report(codebook, out.assignment);
            results[i] = {algos[i],          codebook.size(),
                          codebook.dim(),    k,
                          report.n_clusters, report.mean_intra_pairwise,
                          report.size_std};
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      },
      1);
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

nlohmann::ordered_json to_json(const BenchResult& r) {
  nlohmann::ordered_json j;
  j["algo"] = r.algo;
  j["n_tokens"] = r.n_tokens;
  j["dim"] = r.dim;
  j["k"] = r.k;
  j["wall_time"] = r.wall_time;
  j["repeat_times"] = r.repeat_times;
  j["peak_matrix_bytes"] = r.peak_matrix_bytes;
  return j;
}

nlohmann::ordered_json to_json(const SweepResult& r) {
  nlohmann::ordered_json j;
  j["algo"] = r.algo;
  j["n_tokens"] = r.n_tokens;
  j["dim"] = r.dim;
  j["k"] = r.k;
  j["n_clusters"] = r.n_clusters;
  j["mean_intra_pairwise"] = r.mean_intra_pairwise;
  j["size_std"] = r.size_std;
  return j;
}

}  // namespace cbprior
