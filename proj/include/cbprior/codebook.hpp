#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cbprior/matrix.hpp"

namespace cbprior {

// N x d table of token embedding vectors. Row i is token i.
// Construction enforces N >= 1, d >= 1 and finite entries.
class Codebook {
 public:
  explicit Codebook(Matrix vectors);

  std::size_t size() const { return vectors_.rows(); }
  std::size_t dim() const { return vectors_.cols(); }
  std::span<const double> operator[](std::size_t token) const { return vectors_.row(token); }
  const Matrix& vectors() const { return vectors_; }

  friend bool operator==(const Codebook&, const Codebook&) = default;

 private:
  Matrix vectors_;
};

enum class FileFormat { npy, csv };

// Element type used when writing NPY files. Reading accepts both.
enum class FloatWidth { f32, f64 };

FileFormat format_from_path(const std::filesystem::path& path);

Codebook load_codebook(const std::filesystem::path& path, FileFormat format);

struct SaveOptions {
  FloatWidth width = FloatWidth::f32;
  // Create missing parent directories instead of failing.
  bool create_parents = false;
};

void save_codebook(const Codebook& codebook, const std::filesystem::path& path,
                   FileFormat format, const SaveOptions& options = {});

// Loads an arbitrary 2-D real matrix (queries share the codebook file formats).
Matrix load_matrix(const std::filesystem::path& path, FileFormat format);

struct GaussianComponent {
  std::vector<double> center;
  double scale = 1.0;
  std::size_t count = 0;
};

struct SyntheticSpec {
  std::vector<GaussianComponent> components;
  std::uint64_t seed = 0;
  std::size_t dim = 0;
};

// Concatenates `count` isotropic Gaussian draws per component, in component
// order. Pure function of the spec.
Codebook generate_synthetic(const SyntheticSpec& spec);

// Same sampler, returned as a bare matrix (used for query sets).
Matrix sample_mixture(const SyntheticSpec& spec);

// The non-uniform mixture used by the desk experiments: two tight blobs
// (scale 0.01) and two wide ones (scale 1.0), a 100:1 contrast in spread.
// Dense blobs hold 3/8 of the tokens each, sparse blobs 1/8 each.
SyntheticSpec standard_synthetic_spec(std::size_t n_tokens, std::size_t dim,
                                      std::uint64_t seed);

}  // namespace cbprior
