#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddms/grid.hpp"

namespace ddms {

class FieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DType { F32, F64, U8, U16, I16 };

DType parse_dtype(const std::string& name);
std::size_t dtype_width(DType t);

/// Raw little-endian volume, x fastest. The file size must match exactly.
std::vector<double> load_field(const std::string& path, const GridShape& shape, DType dtype);
void write_field(const std::string& path, std::span<const double> values, DType dtype);

enum class FieldKind { Elevation, Wavelet, Random, TwoBump };

FieldKind parse_field_kind(const std::string& name);

/// elevation: x + 2y + 4z.  wavelet: smooth trigonometric mix.
/// random: uniform [0,1) from the seed.  two-bump: two paraboloid wells.
std::vector<double> generate_field(FieldKind kind, const GridShape& shape, std::uint64_t seed = 0);

}  // namespace ddms
