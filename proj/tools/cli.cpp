#include "cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "cbprior/algorithms.hpp"
#include "cbprior/assignment.hpp"
#include "cbprior/bench.hpp"
#include "cbprior/codebook.hpp"
#include "cbprior/error.hpp"
#include "cbprior/eval.hpp"
#include "cbprior/npy.hpp"
#include "cbprior/parallel.hpp"
#include "cbprior/quantizer.hpp"
#include "cbprior/remap.hpp"

namespace cbprior::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for hashing");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return hex.str();
}

void prepare_output(const fs::path& path, bool mkdirs) {
  const auto parent = path.parent_path();
  if (parent.empty() || fs::exists(parent)) return;
  if (!mkdirs) {
    throw IoError(path.string() + ": parent directory " + parent.string() +
                  " does not exist (pass --mkdirs to create it)");
  }
  fs::create_directories(parent);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw IoError(path.string() + ": write failed");
}

// Collects what a run needs to be reproduced and writes
// <output>.manifest.json next to every output file.
class Manifest {
 public:
  Manifest(std::string subcommand, const std::vector<std::string>& args)
      : subcommand_(std::move(subcommand)), args_(args) {}

  void param(const std::string& key, json value) { params_[key] = std::move(value); }
  void input(const fs::path& path) { inputs_[path.string()] = sha256_file(path); }

  void write_for(const fs::path& output) const {
    json j;
    j["subcommand"] = subcommand_;
    j["tool_version"] = kToolVersion;
    j["argv"] = args_;
    j["parameters"] = params_;
    j["input_digests"] = inputs_;
    j["output"] = output.string();
    write_text(output.string() + ".manifest.json", j.dump(2) + "\n");
  }

 private:
  std::string subcommand_;
  std::vector<std::string> args_;
  json params_ = json::object();
  json inputs_ = json::object();
};

std::vector<std::int32_t> read_index_sequence(const fs::path& path) {
  const auto array = npy::read(path);
  if (array.shape.size() != 1) throw FormatError(path.string() + ": expected a 1-D integer array");
  const auto wide = npy::to_int64(array);
  std::vector<std::int32_t> out(wide.size());
  for (std::size_t i = 0; i < wide.size(); ++i) {
    if (wide[i] < INT32_MIN || wide[i] > INT32_MAX) {
      throw FormatError(path.string() + ": index at position " + std::to_string(i) +
                        " does not fit in int32");
    }
    out[i] = static_cast<std::int32_t>(wide[i]);
  }
  return out;
}

SyntheticSpec read_spec_json(const fs::path& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  try {
    const auto j = nlohmann::json::parse(in);
    SyntheticSpec spec;
    spec.seed = seed;
    spec.dim = j.at("dim").get<std::size_t>();
    for (const auto& c : j.at("components")) {
      spec.components.push_back({c.at("center").get<std::vector<double>>(),
                                 c.at("scale").get<double>(), c.at("count").get<std::size_t>()});
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

json spec_to_json(const SyntheticSpec& spec) {
  json j;
  j["dim"] = spec.dim;
  j["seed"] = spec.seed;
  j["components"] = json::array();
  for (const auto& c : spec.components) {
    j["components"].push_back({{"center", c.center}, {"scale", c.scale}, {"count", c.count}});
  }
  return j;
}

struct CommonOptions {
  bool mkdirs = false;
  std::size_t threads = 0;
};

// --- subcommand option blocks ------------------------------------------------

struct SynthOptions {
  std::string out;
  std::string spec_path;
  std::size_t n = 1024;
  std::size_t dim = 8;
  std::uint64_t seed = 0;
  bool f64 = false;
};

struct QuantizeOptions {
  std::string queries, codebook, out, distances_out;
};

struct ClusterOptions {
  std::string input, labels_out, trace_out, algo = "dcpe", metric = "euclidean", scan = "row-cache";
  std::size_t k = 0;
  std::size_t max_cluster_size = 0;
  std::size_t max_iters = 100;
  std::uint64_t seed = 0;
  double tol = 0.0;
  bool literal_sum_argmin = false;
};

struct CutOptions {
  std::string trace, labels_out;
  std::size_t n_tokens = 0, k = 0;
};

struct RemapOptions {
  std::string input, labels, out;
  std::uint64_t seed = 0;
};

struct EvalOptions {
  std::string input, labels, queries, out, hist_csv;
  std::size_t trials = 16;
  std::uint64_t seed = 0;
};

struct BenchOptions {
  std::string input, out;
  std::vector<std::string> algos = {"dcpe", "dcpe-naive"};
  std::size_t synth_n = 1024, dim = 8, k = 0, repeats = 3;
  std::uint64_t seed = 0;
  bool sweep = false;
};

// --- handlers ----------------------------------------------------------------

void do_synth(const SynthOptions& o, const CommonOptions& common, Manifest& manifest) {
  const SyntheticSpec spec = o.spec_path.empty() ? standard_synthetic_spec(o.n, o.dim, o.seed)
                                                 : read_spec_json(o.spec_path, o.seed);
  if (!o.spec_path.empty()) manifest.input(o.spec_path);
  manifest.param("spec", spec_to_json(spec));
  manifest.param("f64", o.f64);
  const auto codebook = generate_synthetic(spec);
  const fs::path out = o.out;
  save_codebook(codebook, out, format_from_path(out),
                {o.f64 ? FloatWidth::f64 : FloatWidth::f32, common.mkdirs});
  manifest.write_for(out);
  std::clog << "synth: wrote " << codebook.size() << "x" << codebook.dim() << " codebook to "
            << out << "\n";
}

void do_quantize(const QuantizeOptions& o, const CommonOptions& common, Manifest& manifest) {
  manifest.input(o.queries);
  manifest.input(o.codebook);
  const auto codebook = load_codebook(o.codebook, format_from_path(o.codebook));
  const auto queries = load_matrix(o.queries, format_from_path(o.queries));
  const auto result = quantize(queries, codebook);
  prepare_output(o.out, common.mkdirs);
  npy::write(o.out, npy::from_int32(result.indices));
  manifest.write_for(o.out);
  if (!o.distances_out.empty()) {
    prepare_output(o.distances_out, common.mkdirs);
    npy::write(o.distances_out,
               npy::from_doubles(result.distances, {result.distances.size()}, npy::Dtype::f64));
    manifest.write_for(o.distances_out);
  }
}

void do_cluster(const ClusterOptions& o, const CommonOptions& common, Manifest& manifest) {
  manifest.input(o.input);
  const auto codebook = load_codebook(o.input, format_from_path(o.input));
  AlgorithmParams p;
  p.k = o.k;
  if (o.max_cluster_size > 0) {
    if (o.algo != "dcpe") throw InvalidArgument("--max-cluster-size applies to --algo dcpe only");
    p.max_cluster_size = o.max_cluster_size;
  }
  p.metric = metric_from_string(o.metric);
  p.argmin = o.literal_sum_argmin ? ArgminKey::literal_sum : ArgminKey::average;
  p.scan = o.scan == "full" ? ScanStrategy::full_scan : ScanStrategy::row_cache;
  p.max_iters = o.max_iters;
  p.seed = o.seed;
  p.tol = o.tol;

  std::clog << "cluster: " << o.algo << " on " << codebook.size() << " tokens -> k=" << o.k
            << "\n";
  const auto result = run_algorithm(o.algo, codebook, p);
  prepare_output(o.labels_out, common.mkdirs);
  write_labels_npy(result.assignment, o.labels_out);
  manifest.write_for(o.labels_out);
  if (!o.trace_out.empty()) {
    if (!result.trace) throw InvalidArgument("--trace-out requires an agglomerative --algo");
    prepare_output(o.trace_out, common.mkdirs);
    write_trace_jsonl(*result.trace, o.trace_out);
    manifest.write_for(o.trace_out);
  }
}

void do_cut(const CutOptions& o, const CommonOptions& common, Manifest& manifest) {
  manifest.input(o.trace);
  const auto trace = read_trace_jsonl(o.trace);
  const auto assignment = cut_trace(trace, o.n_tokens, o.k);
  prepare_output(o.labels_out, common.mkdirs);
  write_labels_npy(assignment, o.labels_out);
  manifest.write_for(o.labels_out);
}

void do_remap(const RemapOptions& o, const CommonOptions& common, Manifest& manifest) {
  manifest.input(o.input);
  manifest.input(o.labels);
  const auto assignment = read_labels_npy(o.labels);
  const auto out = remap_to_clusters(read_index_sequence(o.input), assignment);
  prepare_output(o.out, common.mkdirs);
  npy::write(o.out, npy::from_int32(out));
  manifest.write_for(o.out);
}

void do_decode(const RemapOptions& o, const CommonOptions& common, Manifest& manifest) {
  manifest.input(o.input);
  manifest.input(o.labels);
  const auto assignment = read_labels_npy(o.labels);
  const auto out = decode_random_selection(read_index_sequence(o.input), assignment, o.seed);
  prepare_output(o.out, common.mkdirs);
  npy::write(o.out, npy::from_int32(out));
  manifest.write_for(o.out);
}

void do_eval(const EvalOptions& o, const CommonOptions& common, Manifest& manifest) {
  manifest.input(o.input);
  manifest.input(o.labels);
  const auto codebook = load_codebook(o.input, format_from_path(o.input));
  const auto assignment = read_labels_npy(o.labels);
  const auto report = quality_report(codebook, assignment);

  json j;
  j["mean_intra_pairwise"] = report.mean_intra_pairwise;
  j["size_std"] = report.size_std;
  j["size_histogram"] = json::object();
  for (const auto& [size, count] : report.size_histogram) {
    j["size_histogram"][std::to_string(size)] = count;
  }
  j["n_clusters"] = report.n_clusters;
  j["n_tokens"] = report.n_tokens;
  if (!o.queries.empty()) {
    manifest.input(o.queries);
    const auto queries = load_matrix(o.queries, format_from_path(o.queries));
    j["replacement_distortion"] =
        replacement_distortion(codebook, assignment, queries, o.seed, o.trials);
  }
  prepare_output(o.out, common.mkdirs);
  write_text(o.out, j.dump(2) + "\n");
  manifest.write_for(o.out);

  if (!o.hist_csv.empty()) {
    std::ostringstream csv;
    csv << "size,count\n";
    for (const auto& [size, count] : report.size_histogram) csv << size << ',' << count << '\n';
    prepare_output(o.hist_csv, common.mkdirs);
    write_text(o.hist_csv, csv.str());
    manifest.write_for(o.hist_csv);
  }
}

void do_bench(const BenchOptions& o, const CommonOptions& common, Manifest& manifest) {
  std::optional<Codebook> codebook;
  if (!o.input.empty()) {
    manifest.input(o.input);
    codebook.emplace(load_codebook(o.input, format_from_path(o.input)));
  } else {
    codebook.emplace(generate_synthetic(standard_synthetic_spec(o.synth_n, o.dim, o.seed)));
  }
  const std::size_t k = o.k ? o.k : codebook->size() / 2;
  manifest.param("resolved_k", k);
  AlgorithmParams params;
  params.seed = o.seed;
  std::ostringstream lines;
  if (o.sweep) {
    for (const auto& r : run_sweep(*codebook, k, o.algos, params)) lines << to_json(r).dump() << '\n';
  } else {
    for (const auto& r : run_bench(*codebook, k, o.algos, o.repeats, params)) {
      lines << to_json(r).dump() << '\n';
    }
  }
  prepare_output(o.out, common.mkdirs);
  write_text(o.out, lines.str());
  manifest.write_for(o.out);
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Codebook prior extraction: clustering, remapping and evaluation tools",
               "codebook-prior"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  app.option_defaults()->always_capture_default();

  CommonOptions common;
  app.add_flag("--mkdirs", common.mkdirs, "Create missing parent directories of outputs");
  app.add_option("--threads", common.threads,
                 "Cap on internal parallelism (default: CODEBOOK_PRIOR_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  const std::vector<std::string> algos = algorithm_ids();

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic Gaussian-mixture codebook");
  synth_cmd->add_option("--out", synth.out, "Output codebook (.npy or .csv)")->required();
  synth_cmd->add_option("--spec", synth.spec_path,
                        "JSON mixture spec {dim, components:[{center, scale, count}]}")
      ->check(CLI::ExistingFile);
  synth_cmd->add_option("--n", synth.n, "Token count for the standard non-uniform mixture")
      ->check(CLI::Range(std::size_t{8}, std::size_t{1} << 30));
  synth_cmd->add_option("--dim", synth.dim, "Embedding dimension")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_flag("--f64", synth.f64, "Write float64 instead of float32");

  QuantizeOptions quant;
  auto* quant_cmd = app.add_subcommand("quantize", "Nearest-token lookup of query vectors");
  quant_cmd->add_option("--queries", quant.queries, "Query matrix (.npy)")->required()->check(CLI::ExistingFile);
  quant_cmd->add_option("--codebook", quant.codebook, "Codebook (.npy)")->required()->check(CLI::ExistingFile);
  quant_cmd->add_option("--out", quant.out, "Output token indices (int32 .npy)")->required();
  quant_cmd->add_option("--distances-out", quant.distances_out, "Optional float64 distances (.npy)");

  ClusterOptions cluster;
  auto* cluster_cmd = app.add_subcommand("cluster", "Cluster a codebook");
  cluster_cmd->add_option("--input", cluster.input, "Codebook (.npy or .csv)")->required()->check(CLI::ExistingFile);
  cluster_cmd->add_option("--k", cluster.k, "Number of clusters")->required()->check(CLI::PositiveNumber);
  cluster_cmd->add_option("--algo", cluster.algo, "Clustering algorithm")->check(CLI::IsMember(algos));
  cluster_cmd->add_option("--max-cluster-size", cluster.max_cluster_size,
                          "Skip merges whose result would exceed this size (dcpe)")
      ->check(CLI::PositiveNumber);
  cluster_cmd->add_option("--labels-out", cluster.labels_out, "Output labels (int32 .npy)")->required();
  cluster_cmd->add_option("--trace-out", cluster.trace_out, "Output merge trace (.jsonl)");
  cluster_cmd->add_option("--max-iters", cluster.max_iters, "k-means iteration limit")->check(CLI::PositiveNumber);
  cluster_cmd->add_option("--seed", cluster.seed, "Random seed for k-means variants");
  cluster_cmd->add_option("--tol", cluster.tol, "k-means centroid-shift tolerance")->check(CLI::NonNegativeNumber);
  cluster_cmd->add_option("--metric", cluster.metric, "Token distance for dcpe")
      ->check(CLI::IsMember({"euclidean", "cosine"}));
  cluster_cmd->add_option("--scan", cluster.scan, "dcpe pair search")->check(CLI::IsMember({"row-cache", "full"}));
  cluster_cmd->add_flag("--literal-sum-argmin", cluster.literal_sum_argmin,
                        "Minimise summed rather than averaged distances (dcpe)");

  CutOptions cut;
  auto* cut_cmd = app.add_subcommand("cut", "Derive a k-cluster assignment from a merge trace");
  cut_cmd->add_option("--trace", cut.trace, "Merge trace (.jsonl)")->required()->check(CLI::ExistingFile);
  cut_cmd->add_option("--n-tokens", cut.n_tokens, "Codebook size N")->required()->check(CLI::PositiveNumber);
  cut_cmd->add_option("--k", cut.k, "Number of clusters")->required()->check(CLI::PositiveNumber);
  cut_cmd->add_option("--labels-out", cut.labels_out, "Output labels (int32 .npy)")->required();

  RemapOptions remap;
  auto* remap_cmd = app.add_subcommand("remap", "Convert token indices to cluster indices");
  remap_cmd->add_option("--input", remap.input, "Token sequence (integer .npy)")->required()->check(CLI::ExistingFile);
  remap_cmd->add_option("--labels", remap.labels, "Cluster labels (.npy)")->required()->check(CLI::ExistingFile);
  remap_cmd->add_option("--out", remap.out, "Output cluster sequence (int32 .npy)")->required();

  RemapOptions decode;
  auto* decode_cmd = app.add_subcommand("decode", "Replace cluster indices by random member tokens");
  decode_cmd->add_option("--input", decode.input, "Cluster sequence (integer .npy)")->required()->check(CLI::ExistingFile);
  decode_cmd->add_option("--labels", decode.labels, "Cluster labels (.npy)")->required()->check(CLI::ExistingFile);
  decode_cmd->add_option("--out", decode.out, "Output token sequence (int32 .npy)")->required();
  decode_cmd->add_option("--seed", decode.seed, "Random seed");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Cluster quality report");
  eval_cmd->add_option("--input", eval.input, "Codebook (.npy or .csv)")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--labels", eval.labels, "Cluster labels (.npy)")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval.out, "Output JSON report")->required();
  eval_cmd->add_option("--queries", eval.queries, "Query vectors for replacement distortion")->check(CLI::ExistingFile);
  eval_cmd->add_option("--trials", eval.trials, "Replacement trials")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", eval.seed, "Random seed for replacement draws");
  eval_cmd->add_option("--hist-csv", eval.hist_csv, "Optional size histogram CSV");

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time clustering algorithms on one input");
  bench_cmd->add_option("--input", bench.input, "Codebook; omit to use the standard synthetic mixture")
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--synth-n", bench.synth_n, "Synthetic token count")->check(CLI::Range(std::size_t{8}, std::size_t{1} << 30));
  bench_cmd->add_option("--dim", bench.dim, "Synthetic dimension")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench.seed, "Seed for synthetic data and k-means variants");
  bench_cmd->add_option("--k", bench.k, "Number of clusters (default N/2)")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--algos", bench.algos, "Algorithms to time")->delimiter(',')->check(CLI::IsMember(algos));
  bench_cmd->add_option("--repeats", bench.repeats, "Timed repeats per algorithm")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out", bench.out, "Output JSONL")->required();
  bench_cmd->add_flag("--sweep", bench.sweep,
                      "Run the algorithms concurrently without timing and report cluster quality");

  std::vector<char*> argv;
  std::vector<std::string> storage = args.empty() ? std::vector<std::string>{"codebook-prior"} : args;
  for (auto& a : storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  if (common.threads) set_thread_count(common.threads);
  auto* sub = app.get_subcommands().front();
  Manifest manifest(sub->get_name(), std::vector<std::string>(storage.begin() + 1, storage.end()));
  // Record every option of the chosen subcommand with its resolved value.
  for (const auto* opt : sub->get_options()) {
    if (opt->get_name() == "--help") continue;
    const auto results = opt->results();
    std::string value = results.empty() ? opt->get_default_str() : results.back();
    if (opt->get_expected_max() > 1) {
      std::string joined;
      for (const auto& r : results) joined += (joined.empty() ? "" : ",") + r;
      value = results.empty() ? opt->get_default_str() : joined;
    }
    manifest.param(opt->get_name(), value);
  }

  try {
    const std::string& name = sub->get_name();
    if (name == "synth") do_synth(synth, common, manifest);
    else if (name == "quantize") do_quantize(quant, common, manifest);
    else if (name == "cluster") do_cluster(cluster, common, manifest);
    else if (name == "cut") do_cut(cut, common, manifest);
    else if (name == "remap") do_remap(remap, common, manifest);
    else if (name == "decode") do_decode(decode, common, manifest);
    else if (name == "eval") do_eval(eval, common, manifest);
    else if (name == "bench") do_bench(bench, common, manifest);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    set_thread_count(0);
    return kDataError;
  }
  set_thread_count(0);
  return kOk;
}

}  // namespace cbprior::cli
