#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cbprior::npy {

enum class Dtype { f32, f64, i32, i64 };

// Little-endian descr string for a dtype, e.g. "<f4".
std::string descr(Dtype dtype);

// In-memory view of a version 1.0 NPY file. C-order payload only.
struct Array {
  Dtype dtype = Dtype::f64;
  std::vector<std::size_t> shape;
  std::vector<std::uint8_t> payload;  // raw little-endian bytes

  std::size_t element_count() const;
};

Array read(const std::filesystem::path& path);
Array parse(std::span<const std::uint8_t> bytes, const std::string& origin = "<memory>");

void write(const std::filesystem::path& path, const Array& array);
std::vector<std::uint8_t> serialize(const Array& array);

// Conversions. `to_doubles` accepts any dtype; `to_int64` requires an integer dtype.
std::vector<double> to_doubles(const Array& array);
std::vector<std::int64_t> to_int64(const Array& array);

Array from_doubles(std::span<const double> values, std::vector<std::size_t> shape, Dtype dtype);
Array from_int32(std::span<const std::int32_t> values);

}  // namespace cbprior::npy
