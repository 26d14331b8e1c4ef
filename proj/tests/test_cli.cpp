#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "cbprior/assignment.hpp"
#include "cbprior/codebook.hpp"
#include "cbprior/npy.hpp"
#include "cbprior/remap.hpp"
#include "cli.hpp"
#include "test_util.hpp"

using namespace cbprior;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "codebook-prior");
  std::ostringstream err, log;
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  auto* old_log = std::clog.rdbuf(log.rdbuf());
  std::ostringstream out;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  const int code = cli::run(args);
  std::cerr.rdbuf(old_err);
  std::clog.rdbuf(old_log);
  std::cout.rdbuf(old_out);
  return {code, err.str()};
}

std::string bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), {}};
}

nlohmann::json manifest_of(const fs::path& p) {
  return nlohmann::json::parse(bytes(p.string() + ".manifest.json"));
}

void write_sequence(const fs::path& p, const std::vector<std::int32_t>& seq) {
  npy::write(p, npy::from_int32(seq));
}

std::vector<std::int32_t> read_sequence(const fs::path& p) {
  const auto wide = npy::to_int64(npy::read(p));
  return {wide.begin(), wide.end()};
}

// A small end-to-end session in `dir`; returns every file it wrote.
std::vector<fs::path> pipeline(const testutil::TempDir& dir) {
  const auto s = [&](const std::string& name) { return (dir / name).string(); };
  write_sequence(dir / "tokens.npy", {0, 5, 17, 17, 63, 2});
  REQUIRE(run({"synth", "--out", s("cb.npy"), "--n", "64", "--dim", "4", "--seed", "3"}).code == 0);
  REQUIRE(run({"synth", "--out", s("q.npy"), "--n", "32", "--dim", "4", "--seed", "4"}).code == 0);
  REQUIRE(run({"quantize", "--queries", s("q.npy"), "--codebook", s("cb.npy"), "--out",
               s("qi.npy"), "--distances-out", s("qd.npy")})
              .code == 0);
  REQUIRE(run({"cluster", "--input", s("cb.npy"), "--k", "8", "--labels-out", s("l.npy"),
               "--trace-out", s("t.jsonl")})
              .code == 0);
  REQUIRE(run({"cluster", "--input", s("cb.npy"), "--k", "8", "--algo", "kmeanspp", "--seed",
               "9", "--labels-out", s("lk.npy")})
              .code == 0);
  REQUIRE(run({"cut", "--trace", s("t.jsonl"), "--n-tokens", "64", "--k", "8", "--labels-out",
               s("cut.npy")})
              .code == 0);
  REQUIRE(run({"remap", "--input", s("tokens.npy"), "--labels", s("l.npy"), "--out", s("c.npy")})
              .code == 0);
  REQUIRE(run({"decode", "--input", s("c.npy"), "--labels", s("l.npy"), "--out", s("d.npy"),
               "--seed", "12"})
              .code == 0);
  REQUIRE(run({"eval", "--input", s("cb.npy"), "--labels", s("l.npy"), "--out", s("e.json"),
               "--queries", s("q.npy"), "--trials", "4", "--hist-csv", s("h.csv")})
              .code == 0);
  REQUIRE(run({"bench", "--input", s("cb.npy"), "--k", "8", "--algos",
               "dcpe,kmeans,agg-centroid", "--sweep", "--out", s("sweep.jsonl")})
              .code == 0);
  std::vector<fs::path> files;
  for (const char* name : {"cb.npy", "q.npy", "qi.npy", "qd.npy", "l.npy", "t.jsonl", "lk.npy",
                           "cut.npy", "c.npy", "d.npy", "e.json", "h.csv", "sweep.jsonl"}) {
    files.push_back(dir / name);
    files.push_back(dir / (std::string(name) + ".manifest.json"));
  }
  return files;
}

}  // namespace

TEST_CASE("pipeline outputs are consistent with each other") {
  testutil::TempDir dir;
  const auto files = pipeline(dir);
  for (const auto& f : files) CHECK_MESSAGE(fs::exists(f), f.string());

  const auto cb = load_codebook(dir / "cb.npy", FileFormat::npy);
  CHECK(cb.size() == 64);
  CHECK(cb.dim() == 4);
  CHECK(npy::read(dir / "cb.npy").dtype == npy::Dtype::f32);

  const auto labels = read_labels_npy(dir / "l.npy");
  CHECK(labels.n_clusters() == 8);
  CHECK(bytes(dir / "cut.npy") == bytes(dir / "l.npy"));
  CHECK(read_trace_jsonl(dir / "t.jsonl").size() == 56);

  const std::vector<std::int32_t> tokens = {0, 5, 17, 17, 63, 2};
  const auto clusters = read_sequence(dir / "c.npy");
  CHECK(clusters == remap_to_clusters(tokens, labels));
  CHECK(remap_to_clusters(read_sequence(dir / "d.npy"), labels) == clusters);

  CHECK(read_sequence(dir / "qi.npy").size() == 32);
  const auto report = nlohmann::json::parse(bytes(dir / "e.json"));
  CHECK(report["n_clusters"] == 8);
  CHECK(report.contains("mean_intra_pairwise"));
  CHECK(report.contains("size_std"));
  CHECK(report.contains("size_histogram"));
  CHECK(report["replacement_distortion"].get<double>() >= 0.0);
  CHECK(bytes(dir / "h.csv").rfind("size,count\n", 0) == 0);

  std::istringstream sweep(bytes(dir / "sweep.jsonl"));
  std::string line;
  std::size_t rows = 0;
  while (std::getline(sweep, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["n_clusters"] == 8);
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("manifests record the run") {
  testutil::TempDir dir;
  pipeline(dir);
  const auto m = manifest_of(dir / "l.npy");
  CHECK(m["subcommand"] == "cluster");
  CHECK(m["tool_version"] == cli::kToolVersion);
  CHECK(m["output"] == (dir / "l.npy").string());
  CHECK(m["parameters"]["--k"] == "8");
  CHECK(m["parameters"]["--algo"] == "dcpe");
  CHECK(m["parameters"]["--seed"] == "0");
  CHECK(m["argv"][0] == "cluster");
  CHECK(m["input_digests"].contains((dir / "cb.npy").string()));
  CHECK(manifest_of(dir / "cb.npy")["input_digests"].empty());

  // Known-answer digest: sha256 of the exact bytes below.
  const auto trace = dir / "kat.jsonl";
  std::ofstream(trace, std::ios::binary) << "{\"a\":0,\"b\":1,\"dist\":1.5}\n";
  REQUIRE(run({"cut", "--trace", trace.string(), "--n-tokens", "2", "--k", "1", "--labels-out",
               (dir / "kat.npy").string()})
              .code == 0);
  CHECK(manifest_of(dir / "kat.npy")["input_digests"][trace.string()] ==
        "1f417d7f83e94eda9d71f2f62e964206a8531872ed72f1fee51d8793bea1a39c");
}

TEST_CASE("rerunning the same commands reproduces every file byte for byte") {
  testutil::TempDir dir;
  const auto files = pipeline(dir);
  std::vector<std::string> first;
  for (const auto& f : files) first.push_back(bytes(f));
  pipeline(dir);
  for (std::size_t i = 0; i < files.size(); ++i) CHECK_MESSAGE(bytes(files[i]) == first[i], files[i].string());
}

TEST_CASE("usage errors exit 1 and name the flag") {
  testutil::TempDir dir;
  const auto cb = (dir / "cb.npy").string();
  REQUIRE(run({"synth", "--out", cb, "--n", "16"}).code == 0);
  const auto zero = run({"cluster", "--input", cb, "--k", "0", "--labels-out", (dir / "l.npy").string()});
  CHECK(zero.code == cli::kUsageError);
  CHECK(zero.err.find("--k") != std::string::npos);
  CHECK(run({}).code == cli::kUsageError);
  CHECK(run({"frobnicate"}).code == cli::kUsageError);
  CHECK(run({"cluster", "--input", cb, "--k", "2"}).code == cli::kUsageError);
  CHECK(run({"cluster", "--input", cb, "--k", "2", "--algo", "nope", "--labels-out", "x.npy"}).code ==
        cli::kUsageError);
  CHECK(run({"cluster", "--input", (dir / "missing.npy").string(), "--k", "2", "--labels-out",
             (dir / "l.npy").string()})
            .code == cli::kUsageError);
  CHECK(run({"--help"}).code == cli::kOk);
}

TEST_CASE("data errors exit 2") {
  testutil::TempDir dir;
  const auto cb = (dir / "cb.npy").string();
  REQUIRE(run({"synth", "--out", cb, "--n", "16"}).code == 0);
  std::ofstream(dir / "junk.npy") << "not an array";
  CHECK(run({"cluster", "--input", (dir / "junk.npy").string(), "--k", "2", "--labels-out",
             (dir / "l.npy").string()})
            .code == cli::kDataError);
  // k larger than N passes flag checks but fails in the library.
  const auto big = run({"cluster", "--input", cb, "--k", "17", "--labels-out", (dir / "l.npy").string()});
  CHECK(big.code == cli::kDataError);
  CHECK(big.err.find("k=17") != std::string::npos);
  // Infeasible cap.
  CHECK(run({"cluster", "--input", cb, "--k", "2", "--max-cluster-size", "4", "--labels-out",
             (dir / "l.npy").string()})
            .code == cli::kDataError);
  write_sequence(dir / "bad.npy", {0, 99});
  REQUIRE(run({"cluster", "--input", cb, "--k", "4", "--labels-out", (dir / "l.npy").string()}).code == 0);
  CHECK(run({"remap", "--input", (dir / "bad.npy").string(), "--labels", (dir / "l.npy").string(),
             "--out", (dir / "c.npy").string()})
            .code == cli::kDataError);
  CHECK(!fs::exists(dir / "c.npy"));
}

TEST_CASE("missing output directories need --mkdirs") {
  testutil::TempDir dir;
  const auto nested = (dir / "a" / "b" / "cb.npy").string();
  CHECK(run({"synth", "--out", nested, "--n", "16"}).code == cli::kDataError);
  CHECK(!fs::exists(dir / "a"));
  CHECK(run({"--mkdirs", "synth", "--out", nested, "--n", "16"}).code == cli::kOk);
  CHECK(fs::exists(nested));
  CHECK(fs::exists(nested + ".manifest.json"));
}

TEST_CASE("synth accepts a JSON mixture spec and csv output") {
  testutil::TempDir dir;
  const auto spec = dir / "spec.json";
  std::ofstream(spec) << R"({"dim": 2, "components": [)"
                      << R"({"center": [0, 0], "scale": 0.01, "count": 5},)"
                      << R"({"center": [10, 0], "scale": 1.0, "count": 3}]})";
  const auto out = dir / "cb.csv";
  REQUIRE(run({"synth", "--spec", spec.string(), "--out", out.string(), "--seed", "1"}).code == 0);
  const auto cb = load_codebook(out, FileFormat::csv);
  CHECK(cb.size() == 8);
  CHECK(cb.dim() == 2);
  CHECK(std::abs(cb[0][0]) < 0.1);
  CHECK(std::abs(cb[7][0] - 10.0) < 6.0);
  CHECK(manifest_of(out)["input_digests"].contains(spec.string()));
}

TEST_CASE("bench timing output lists every repeat") {
  testutil::TempDir dir;
  const auto out = dir / "b.jsonl";
  REQUIRE(run({"bench", "--synth-n", "64", "--dim", "2", "--k", "8", "--algos", "dcpe,dcpe-naive",
               "--repeats", "2", "--out", out.string()})
              .code == 0);
  std::istringstream lines(bytes(out));
  std::string line;
  std::vector<std::string> algos;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    algos.push_back(j["algo"]);
    CHECK(j["repeat_times"].size() == 2);
    CHECK(j["wall_time"].get<double>() > 0.0);
  }
  CHECK(algos == std::vector<std::string>{"dcpe", "dcpe-naive"});
  CHECK(manifest_of(out)["parameters"]["resolved_k"] == 8);
}
