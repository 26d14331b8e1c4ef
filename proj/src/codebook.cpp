#include "cbprior/codebook.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>

#include "cbprior/error.hpp"
#include "cbprior/npy.hpp"
#include "cbprior/rng.hpp"

namespace cbprior {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw InvalidArgument("matrix data size " + std::to_string(data_.size()) +
                          " does not match shape " + std::to_string(rows_) + "x" +
                          std::to_string(cols_));
  }
}

bool all_finite(const Matrix& m) {
  for (double v : m.data()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Codebook::Codebook(Matrix vectors) : vectors_(std::move(vectors)) {
  if (vectors_.rows() == 0 || vectors_.cols() == 0) {
    throw InvalidArgument("codebook must have at least one token and one dimension");
  }
  for (std::size_t i = 0; i < vectors_.rows(); ++i) {
    for (double v : vectors_.row(i)) {
      if (!std::isfinite(v)) {
        throw InvalidArgument("codebook entry in row " + std::to_string(i) + " is not finite");
      }
    }
  }
}

FileFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? FileFormat::csv : FileFormat::npy;
}

namespace {

Matrix load_npy_matrix(const std::filesystem::path& path) {
  const auto array = npy::read(path);
  if (array.shape.size() != 2) {
    throw FormatError(path.string() + ": rank " + std::to_string(array.shape.size()) +
                      " array, expected rank 2 (rank ≠ 2)");
  }
  if (array.dtype != npy::Dtype::f32 && array.dtype != npy::Dtype::f64) {
    throw FormatError(path.string() + ": expected <f4 or <f8 data, found " +
                      npy::descr(array.dtype));
  }
  auto values = npy::to_doubles(array);
  const std::size_t cols = array.shape[1];
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw FormatError(path.string() + ": non-finite value at row " + std::to_string(i / cols) +
                        ", column " + std::to_string(i % cols));
    }
  }
  return Matrix(array.shape[0], cols, std::move(values));
}

Matrix load_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t count = 0;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const auto first = field.find_first_not_of(" \t");
      const auto last = field.find_last_not_of(" \t");
      if (first == std::string::npos) {
        throw FormatError(path.string() + ": empty field in row " + std::to_string(rows));
      }
      const char* begin = field.data() + first;
      const char* end = field.data() + last + 1;
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(begin, end, v);
      if (ec != std::errc() || ptr != end) {
        throw FormatError(path.string() + ": cannot parse '" + std::string(begin, end) +
                          "' in row " + std::to_string(rows));
      }
      if (!std::isfinite(v)) {
        throw FormatError(path.string() + ": non-finite value in row " + std::to_string(rows));
      }
      values.push_back(v);
      ++count;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw FormatError(path.string() + ": row " + std::to_string(rows) + " has " +
                        std::to_string(count) + " fields, expected " + std::to_string(cols));
    }
    ++rows;
  }
  return Matrix(rows, cols, std::move(values));
}

void prepare_parent(const std::filesystem::path& path, bool create_parents) {
  const auto parent = path.parent_path();
  if (parent.empty() || std::filesystem::exists(parent)) return;
  if (!create_parents) {
    throw IoError(path.string() + ": parent directory " + parent.string() +
                  " does not exist (pass --mkdirs to create it)");
  }
  std::filesystem::create_directories(parent);
}

}  // namespace

Matrix load_matrix(const std::filesystem::path& path, FileFormat format) {
  if (!std::filesystem::exists(path)) throw IoError(path.string() + ": no such file");
  return format == FileFormat::npy ? load_npy_matrix(path) : load_csv_matrix(path);
}

Codebook load_codebook(const std::filesystem::path& path, FileFormat format) {
  auto m = load_matrix(path, format);
  if (m.rows() == 0 || m.cols() == 0) {
    throw FormatError(path.string() + ": empty array");
  }
  return Codebook(std::move(m));
}

void save_codebook(const Codebook& codebook, const std::filesystem::path& path,
                   FileFormat format, const SaveOptions& options) {
  prepare_parent(path, options.create_parents);
  const Matrix& m = codebook.vectors();
  if (format == FileFormat::npy) {
    npy::write(path, npy::from_doubles(m.data(), {m.rows(), m.cols()},
                                       options.width == FloatWidth::f32 ? npy::Dtype::f32
                                                                        : npy::Dtype::f64));
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << std::setprecision(17);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << row[j];
    }
    out << '\n';
  }
  if (!out) throw IoError(path.string() + ": write failed");
}

Matrix sample_mixture(const SyntheticSpec& spec) {
  if (spec.dim == 0) throw InvalidArgument("synthetic spec: dim must be positive");
  std::size_t total = 0;
  for (std::size_t c = 0; c < spec.components.size(); ++c) {
    const auto& comp = spec.components[c];
    if (!(comp.scale > 0.0) || !std::isfinite(comp.scale)) {
      throw InvalidArgument("synthetic spec: component " + std::to_string(c) +
                            " has non-positive scale");
    }
    if (comp.center.size() != spec.dim) {
      throw InvalidArgument("synthetic spec: component " + std::to_string(c) +
                            " center has wrong dimension");
    }
    total += comp.count;
  }
  if (total == 0) throw InvalidArgument("synthetic spec: total count is zero");

  Matrix out(total, spec.dim);
  std::size_t row = 0;
  for (std::size_t c = 0; c < spec.components.size(); ++c) {
    const auto& comp = spec.components[c];
    // Independent stream per component so that editing one component's count
    // leaves the others' draws unchanged.
    SplitMix64 gen(derive_seed(spec.seed, c));
    for (std::size_t i = 0; i < comp.count; ++i, ++row) {
      auto r = out.row(row);
      for (std::size_t j = 0; j < spec.dim; j += 2) {
        // Box-Muller; 1 - u keeps the log argument in (0, 1].
        const double u1 = 1.0 - uniform_unit(gen);
        const double u2 = uniform_unit(gen);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        r[j] = comp.center[j] + comp.scale * radius * std::cos(angle);
        if (j + 1 < spec.dim) r[j + 1] = comp.center[j + 1] + comp.scale * radius * std::sin(angle);
      }
    }
  }
  return out;
}

Codebook generate_synthetic(const SyntheticSpec& spec) { return Codebook(sample_mixture(spec)); }

SyntheticSpec standard_synthetic_spec(std::size_t n_tokens, std::size_t dim, std::uint64_t seed) {
  if (n_tokens < 8) throw InvalidArgument("standard synthetic spec needs at least 8 tokens");
  if (dim == 0) throw InvalidArgument("synthetic spec: dim must be positive");
  const std::size_t dense = n_tokens * 3 / 8;
  const std::size_t sparse = n_tokens / 8;
  const std::size_t last_sparse = n_tokens - 2 * dense - sparse;
  auto center = [dim](double x) {
    std::vector<double> c(dim, 0.0);
    c[0] = x;
    return c;
  };
  SyntheticSpec spec;
  spec.dim = dim;
  spec.seed = seed;
  spec.components = {
      {center(0.0), 0.01, dense},
      {center(10.0), 1.0, sparse},
      {center(20.0), 0.01, dense},
      {center(30.0), 1.0, last_sparse},
  };
  return spec;
}

}  // namespace cbprior
