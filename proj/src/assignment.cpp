#include "cbprior/assignment.hpp"

#include <fstream>
#include <numeric>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "cbprior/error.hpp"
#include "cbprior/npy.hpp"

namespace cbprior {
namespace {

template <class Int>
void canonicalize(std::span<const Int> raw, std::vector<std::int32_t>& labels,
                               std::vector<std::vector<std::int32_t>>& members) {
  std::unordered_map<Int, std::int32_t> renumber;
  labels.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    // First appearance in token order is the smallest member, which fixes
    // the canonical number.
    auto [it, inserted] = renumber.try_emplace(raw[i], static_cast<std::int32_t>(renumber.size()));
    if (inserted) members.emplace_back();
    labels[i] = it->second;
    members[it->second].push_back(static_cast<std::int32_t>(i));
  }
}

}  // namespace

ClusterAssignment ClusterAssignment::from_labels(std::span<const std::int64_t> raw) {
  ClusterAssignment out;
  canonicalize(raw, out.labels_, out.members_);
  return out;
}

ClusterAssignment ClusterAssignment::from_labels(std::span<const std::int32_t> raw) {
  ClusterAssignment out;
  canonicalize(raw, out.labels_, out.members_);
  return out;
}

ClusterAssignment ClusterAssignment::identity(std::size_t n_tokens) {
  std::vector<std::int32_t> labels(n_tokens);
  std::iota(labels.begin(), labels.end(), 0);
  return from_labels(std::span<const std::int32_t>(labels));
}

std::vector<std::size_t> ClusterAssignment::sizes() const {
  std::vector<std::size_t> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(m.size());
  return out;
}

ClusterAssignment cut_trace(const MergeTrace& trace, std::size_t n_tokens, std::size_t k) {
  if (n_tokens == 0) throw InvalidArgument("cut_trace: n_tokens must be positive");
  const std::size_t reachable = trace.size() >= n_tokens ? 1 : n_tokens - trace.size();
  if (k < reachable || k > n_tokens) {
    throw InvalidArgument("cut_trace: k=" + std::to_string(k) + " outside reachable range [" +
                          std::to_string(reachable) + ", " + std::to_string(n_tokens) + "]");
  }
  // owner[t] = current representative of token t's cluster, with member lists
  // kept per representative so a merge relabels only the absorbed side.
  std::vector<std::int32_t> owner(n_tokens);
  std::iota(owner.begin(), owner.end(), 0);
  std::vector<std::vector<std::int32_t>> members(n_tokens);
  for (std::size_t t = 0; t < n_tokens; ++t) members[t] = {static_cast<std::int32_t>(t)};

  const std::size_t steps = n_tokens - k;
  for (std::size_t s = 0; s < steps; ++s) {
    const auto& step = trace[s];
    const auto n = static_cast<std::int32_t>(n_tokens);
    if (step.survivor < 0 || step.absorbed < 0 || step.survivor >= n || step.absorbed >= n ||
        owner[step.survivor] != step.survivor || owner[step.absorbed] != step.absorbed ||
        step.survivor == step.absorbed) {
      throw InvalidArgument("cut_trace: step " + std::to_string(s) + " (" +
                            std::to_string(step.survivor) + ", " + std::to_string(step.absorbed) +
                            ") does not name two live clusters");
    }
    auto& dst = members[step.survivor];
    for (std::int32_t t : members[step.absorbed]) {
      owner[t] = step.survivor;
      dst.push_back(t);
    }
    members[step.absorbed].clear();
  }
  return ClusterAssignment::from_labels(std::span<const std::int32_t>(owner));
}

void write_trace_jsonl(const MergeTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  for (const auto& step : trace) {
    nlohmann::ordered_json j;
    j["a"] = step.survivor;
    j["b"] = step.absorbed;
    j["dist"] = step.distance;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError(path.string() + ": write failed");
}

MergeTrace read_trace_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  MergeTrace trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      trace.push_back({j.at("a").get<std::int32_t>(), j.at("b").get<std::int32_t>(),
                       j.at("dist").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return trace;
}

void write_labels_npy(const ClusterAssignment& assignment, const std::filesystem::path& path) {
  npy::write(path, npy::from_int32(assignment.labels()));
}

ClusterAssignment read_labels_npy(const std::filesystem::path& path) {
  const auto array = npy::read(path);
  if (array.shape.size() != 1) {
    throw FormatError(path.string() + ": labels must be a 1-D integer array");
  }
  const auto raw = npy::to_int64(array);
  return ClusterAssignment::from_labels(std::span<const std::int64_t>(raw));
}

}  // namespace cbprior
