#pragma once

#include <filesystem>
#include <variant>

#include "vpme/grid.hpp"

namespace vpme {

/// Field kinds stored in the binary header.
enum class FieldKind : std::uint32_t { scalar = 0, scalar_mean_zero = 1, vector = 2 };

// Binary layout, all little-endian:
//   char[4]  "VPMF"
//   uint32   d
//   uint32   n
//   uint32   kind   (FieldKind)
//   float64  values, row-major; vector fields store component 0 first, then 1, ...
void write_field_binary(const std::filesystem::path& path, const ScalarField& f);
void write_field_binary(const std::filesystem::path& path, const VectorField& f);
std::variant<ScalarField, VectorField> read_field_binary(const std::filesystem::path& path);

/// CSV with header `i,j[,k],x,y[,z],value` (scalar) or `...,e1,e2[,e3]` (vector).
void write_field_csv(const std::filesystem::path& path, const ScalarField& f);
void write_field_csv(const std::filesystem::path& path, const VectorField& f);

}  // namespace vpme
