#include "ddms/field.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

namespace ddms {

namespace {

template <typename T>
void decode(const std::vector<char>& raw, std::vector<double>& out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    T v;
    std::memcpy(&v, raw.data() + i * sizeof(T), sizeof(T));
    out[i] = static_cast<double>(v);
  }
}

template <typename T>
void encode(std::span<const double> values, std::vector<char>& raw) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const T v = static_cast<T>(values[i]);
    std::memcpy(raw.data() + i * sizeof(T), &v, sizeof(T));
  }
}

}  // namespace

static_assert(std::endian::native == std::endian::little, "raw volumes are read as little-endian");

DType parse_dtype(const std::string& name) {
  if (name == "f32") return DType::F32;
  if (name == "f64") return DType::F64;
  if (name == "u8") return DType::U8;
  if (name == "u16") return DType::U16;
  if (name == "i16") return DType::I16;
  throw FieldError("unknown scalar type '" + name + "' (expected f32, f64, u8, u16 or i16)");
}

std::size_t dtype_width(DType t) {
  switch (t) {
    case DType::F32: return 4;
    case DType::F64: return 8;
    case DType::U8: return 1;
    case DType::U16: return 2;
    case DType::I16: return 2;
  }
  return 0;
}

std::vector<double> load_field(const std::string& path, const GridShape& shape, DType dtype) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw FieldError("cannot read " + path + ": " + ec.message());
  const auto expected = static_cast<std::uintmax_t>(shape.vertex_count()) * dtype_width(dtype);
  if (size != expected)
    throw FieldError(path + " has " + std::to_string(size) + " bytes, expected " + std::to_string(expected));
  std::ifstream in(path, std::ios::binary);
  std::vector<char> raw(size);
  if (!in.read(raw.data(), static_cast<std::streamsize>(size))) throw FieldError("short read on " + path);
  std::vector<double> out(shape.vertex_count());
  switch (dtype) {
    case DType::F32: decode<float>(raw, out); break;
    case DType::F64: decode<double>(raw, out); break;
    case DType::U8: decode<std::uint8_t>(raw, out); break;
    case DType::U16: decode<std::uint16_t>(raw, out); break;
    case DType::I16: decode<std::int16_t>(raw, out); break;
  }
  return out;
}

void write_field(const std::string& path, std::span<const double> values, DType dtype) {
  std::vector<char> raw(values.size() * dtype_width(dtype));
  switch (dtype) {
    case DType::F32: encode<float>(values, raw); break;
    case DType::F64: encode<double>(values, raw); break;
    case DType::U8: encode<std::uint8_t>(values, raw); break;
    case DType::U16: encode<std::uint16_t>(values, raw); break;
    case DType::I16: encode<std::int16_t>(values, raw); break;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out.write(raw.data(), static_cast<std::streamsize>(raw.size()))) throw FieldError("cannot write " + path);
}

FieldKind parse_field_kind(const std::string& name) {
  if (name == "elevation") return FieldKind::Elevation;
  if (name == "wavelet") return FieldKind::Wavelet;
  if (name == "random") return FieldKind::Random;
  if (name == "two-bump") return FieldKind::TwoBump;
  throw FieldError("unknown field kind '" + name + "'");
}

std::vector<double> generate_field(FieldKind kind, const GridShape& shape, std::uint64_t seed) {
  std::vector<double> f(shape.vertex_count());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double c1[3] = {std::floor(shape.nx / 4.0), std::floor(shape.ny / 2.0), std::floor(shape.nz / 2.0)};
  const double c2[3] = {std::floor(3.0 * shape.nx / 4.0), c1[1], c1[2]};
  Index i = 0;
  for (Index z = 0; z < shape.nz; ++z)
    for (Index y = 0; y < shape.ny; ++y)
      for (Index x = 0; x < shape.nx; ++x, ++i) {
        const double p[3] = {double(x), double(y), double(z)};
        switch (kind) {
          case FieldKind::Elevation: f[i] = p[0] + 2 * p[1] + 4 * p[2]; break;
          case FieldKind::Wavelet:
            f[i] = 10 * (std::sin(0.6 * p[0]) + std::cos(0.5 * p[1]) + std::sin(0.7 * p[2])) +
                   2 * std::sin(1.3 * p[0] + 0.9 * p[1]) + 3 * std::cos(0.4 * (p[0] + p[2]));
            break;
          case FieldKind::Random: f[i] = uniform(rng); break;
          case FieldKind::TwoBump: {
            double d1 = 0, d2 = 0;
            for (int a = 0; a < 3; ++a) {
              d1 += (p[a] - c1[a]) * (p[a] - c1[a]);
              d2 += (p[a] - c2[a]) * (p[a] - c2[a]);
            }
            f[i] = std::min(d1, d2 + 0.5);
            break;
          }
        }
      }
  return f;
}

}  // namespace ddms
