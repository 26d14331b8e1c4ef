#include "cbprior/npy.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "cbprior/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "NPY payloads are read and written as native little-endian");

namespace cbprior::npy {
namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;
constexpr std::size_t kPreludeLen = 10;  // magic + version + u16 header length

std::size_t item_size(Dtype dtype) {
  switch (dtype) {
    case Dtype::f32:
    case Dtype::i32:
      return 4;
    case Dtype::f64:
    case Dtype::i64:
      return 8;
  }
  return 0;
}

Dtype dtype_from_descr(const std::string& d, const std::string& origin) {
  if (d == "<f4") return Dtype::f32;
  if (d == "<f8") return Dtype::f64;
  if (d == "<i4") return Dtype::i32;
  if (d == "<i8") return Dtype::i64;
  throw FormatError(origin + ": unsupported dtype '" + d + "' in NPY header (byte offset " +
                    std::to_string(kPreludeLen) + ")");
}

// Minimal reader for the Python dict literal that forms the NPY header.
class HeaderParser {
 public:
  HeaderParser(std::string text, std::string origin)
      : text_(std::move(text)), origin_(std::move(origin)) {}

  std::string quoted_value(const std::string& key) {
    const auto pos = value_pos(key);
    const char quote = text_[pos];
    if (quote != '\'' && quote != '"') fail("expected string value for '" + key + "'");
    const auto end = text_.find(quote, pos + 1);
    if (end == std::string::npos) fail("unterminated string for '" + key + "'");
    return text_.substr(pos + 1, end - pos - 1);
  }

  bool bool_value(const std::string& key) {
    const auto pos = value_pos(key);
    if (text_.compare(pos, 4, "True") == 0) return true;
    if (text_.compare(pos, 5, "False") == 0) return false;
    fail("expected True/False for '" + key + "'");
  }

  std::vector<std::size_t> tuple_value(const std::string& key) {
    const auto pos = value_pos(key);
    if (text_[pos] != '(') fail("expected tuple for '" + key + "'");
    const auto end = text_.find(')', pos);
    if (end == std::string::npos) fail("unterminated tuple for '" + key + "'");
    std::vector<std::size_t> dims;
    std::string item;
    std::istringstream in(text_.substr(pos + 1, end - pos - 1));
    while (std::getline(in, item, ',')) {
      const auto first = item.find_first_not_of(" \t");
      if (first == std::string::npos) continue;
      const auto last = item.find_last_not_of(" \tL");
      const std::string digits = item.substr(first, last - first + 1);
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
        fail("bad shape entry '" + digits + "'");
      }
      dims.push_back(std::stoull(digits));
    }
    return dims;
  }

 private:
  std::size_t value_pos(const std::string& key) {
    std::size_t pos = text_.find("'" + key + "'");
    if (pos == std::string::npos) pos = text_.find("\"" + key + "\"");
    if (pos == std::string::npos) fail("missing key '" + key + "'");
    pos = text_.find(':', pos);
    if (pos == std::string::npos) fail("missing ':' after '" + key + "'");
    pos = text_.find_first_not_of(" \t", pos + 1);
    if (pos == std::string::npos) fail("missing value for '" + key + "'");
    return pos;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(origin_ + ": malformed NPY header at byte offset " +
                      std::to_string(kPreludeLen) + ": " + what);
  }

  std::string text_;
  std::string origin_;
};

std::string shape_literal(const std::vector<std::size_t>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  if (shape.size() == 1) s += ",";
  return s + ")";
}

}  // namespace

std::string descr(Dtype dtype) {
  switch (dtype) {
    case Dtype::f32:
      return "<f4";
    case Dtype::f64:
      return "<f8";
    case Dtype::i32:
      return "<i4";
    case Dtype::i64:
      return "<i8";
  }
  return "";
}

std::size_t Array::element_count() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Array parse(std::span<const std::uint8_t> bytes, const std::string& origin) {
  if (bytes.size() < kPreludeLen || std::memcmp(bytes.data(), kMagic, kMagicLen) != 0) {
    throw FormatError(origin + ": missing NPY magic at byte offset 0");
  }
  const unsigned major = bytes[6];
  const unsigned minor = bytes[7];
  if (major != 1 || minor != 0) {
    throw FormatError(origin + ": unsupported NPY version " + std::to_string(major) + "." +
                      std::to_string(minor) + " at byte offset 6");
  }
  const std::size_t header_len = bytes[8] | (static_cast<std::size_t>(bytes[9]) << 8);
  if (bytes.size() < kPreludeLen + header_len) {
    throw FormatError(origin + ": truncated NPY header (declared " + std::to_string(header_len) +
                      " bytes at byte offset 8)");
  }
  HeaderParser header(std::string(reinterpret_cast<const char*>(bytes.data()) + kPreludeLen,
                                  header_len),
                      origin);
  Array out;
  out.dtype = dtype_from_descr(header.quoted_value("descr"), origin);
  if (header.bool_value("fortran_order")) {
    throw FormatError(origin + ": fortran_order arrays are not supported (byte offset 10)");
  }
  out.shape = header.tuple_value("shape");

  const std::size_t data_offset = kPreludeLen + header_len;
  const std::size_t expected = out.element_count() * item_size(out.dtype);
  const std::size_t available = bytes.size() - data_offset;
  if (available != expected) {
    throw FormatError(origin + ": payload at byte offset " + std::to_string(data_offset) +
                      " holds " + std::to_string(available) + " bytes, shape requires " +
                      std::to_string(expected));
  }
  out.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(data_offset), bytes.end());
  return out;
}

Array read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse(bytes, path.string());
}

std::vector<std::uint8_t> serialize(const Array& array) {
  std::string header = "{'descr': '" + descr(array.dtype) +
                       "', 'fortran_order': False, 'shape': " + shape_literal(array.shape) + ", }";
  // Pad with spaces so that the payload starts on a 64-byte boundary; the
  // header ends with a newline.
  const std::size_t unpadded = kPreludeLen + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');

  std::vector<std::uint8_t> out(kMagic, kMagic + kMagicLen);
  out.push_back(1);
  out.push_back(0);
  out.push_back(static_cast<std::uint8_t>(header.size() & 0xff));
  out.push_back(static_cast<std::uint8_t>(header.size() >> 8));
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), array.payload.begin(), array.payload.end());
  return out;
}

void write(const std::filesystem::path& path, const Array& array) {
  const auto bytes = serialize(array);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string() + ": write failed");
}

std::vector<double> to_doubles(const Array& array) {
  const std::size_t n = array.element_count();
  std::vector<double> out(n);
  const auto* p = array.payload.data();
  for (std::size_t i = 0; i < n; ++i) {
    switch (array.dtype) {
      case Dtype::f32: {
        float v;
        std::memcpy(&v, p + 4 * i, 4);
        out[i] = v;
        break;
      }
      case Dtype::f64:
        std::memcpy(&out[i], p + 8 * i, 8);
        break;
      case Dtype::i32: {
        std::int32_t v;
        std::memcpy(&v, p + 4 * i, 4);
        out[i] = v;
        break;
      }
      case Dtype::i64: {
        std::int64_t v;
        std::memcpy(&v, p + 8 * i, 8);
        out[i] = static_cast<double>(v);
        break;
      }
    }
  }
  return out;
}

std::vector<std::int64_t> to_int64(const Array& array) {
  const std::size_t n = array.element_count();
  std::vector<std::int64_t> out(n);
  const auto* p = array.payload.data();
  if (array.dtype == Dtype::i32) {
    for (std::size_t i = 0; i < n; ++i) {
      std::int32_t v;
      std::memcpy(&v, p + 4 * i, 4);
      out[i] = v;
    }
  } else if (array.dtype == Dtype::i64) {
    std::memcpy(out.data(), p, 8 * n);
  } else {
    throw FormatError("expected an integer NPY array, found dtype " + descr(array.dtype));
  }
  return out;
}

Array from_doubles(std::span<const double> values, std::vector<std::size_t> shape, Dtype dtype) {
  Array out;
  out.dtype = dtype;
  out.shape = std::move(shape);
  if (out.element_count() != values.size()) {
    throw InvalidArgument("NPY shape does not match value count");
  }
  out.payload.resize(values.size() * item_size(dtype));
  auto* p = out.payload.data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    switch (dtype) {
      case Dtype::f32: {
        const auto v = static_cast<float>(values[i]);
        std::memcpy(p + 4 * i, &v, 4);
        break;
      }
      case Dtype::f64:
        std::memcpy(p + 8 * i, &values[i], 8);
        break;
      case Dtype::i32: {
        const auto v = static_cast<std::int32_t>(values[i]);
        std::memcpy(p + 4 * i, &v, 4);
        break;
      }
      case Dtype::i64: {
        const auto v = static_cast<std::int64_t>(values[i]);
        std::memcpy(p + 8 * i, &v, 8);
        break;
      }
    }
  }
  return out;
}

Array from_int32(std::span<const std::int32_t> values) {
  Array out;
  out.dtype = Dtype::i32;
  out.shape = {values.size()};
  out.payload.resize(values.size() * 4);
  if (!values.empty()) std::memcpy(out.payload.data(), values.data(), values.size() * 4);
  return out;
}

}  // namespace cbprior::npy
