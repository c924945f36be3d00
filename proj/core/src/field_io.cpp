#include "vpme/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>

#include "vpme/error.hpp"
#include "vpme/io_util.hpp"

namespace vpme {
namespace {

void write_header(std::ostream& os, const TorusGrid& g, FieldKind kind) {
  os.write("VPMF", 4);
  io::put_u32(os, static_cast<std::uint32_t>(g.dim()));
  io::put_u32(os, static_cast<std::uint32_t>(g.n()));
  io::put_u32(os, static_cast<std::uint32_t>(kind));
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  return os;
}

void write_csv_prefix(std::ostream& os, const TorusGrid& g, std::size_t c) {
  const auto ijk = g.coords(c);
  const auto x = g.node(c);
  for (int a = 0; a < g.dim(); ++a) os << ijk[static_cast<std::size_t>(a)] << ',';
  for (int a = 0; a < g.dim(); ++a) os << x[static_cast<std::size_t>(a)] << ',';
}

void write_csv_header(std::ostream& os, const TorusGrid& g) {
  os << (g.dim() == 2 ? "i,j,x,y," : "i,j,k,x,y,z,");
}

}  // namespace

void write_field_binary(const std::filesystem::path& path, const ScalarField& f) {
  auto os = open_out(path, true);
  write_header(os, f.grid, f.mean_zero ? FieldKind::scalar_mean_zero : FieldKind::scalar);
  for (double v : f.values) io::put_f64(os, v);
  if (!os) throw IoError("write failed: " + path.string());
}

void write_field_binary(const std::filesystem::path& path, const VectorField& f) {
  auto os = open_out(path, true);
  write_header(os, f.grid, FieldKind::vector);
  for (const auto& comp : f.components)
    for (double v : comp) io::put_f64(os, v);
  if (!os) throw IoError("write failed: " + path.string());
}

std::variant<ScalarField, VectorField> read_field_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "VPMF", 4) != 0) throw IoError("not a field file: " + path.string());
  const auto d = io::get_u32(is);
  const auto n = io::get_u32(is);
  const auto kind = static_cast<FieldKind>(io::get_u32(is));
  const TorusGrid g(static_cast<int>(d), static_cast<int>(n));
  auto read_block = [&](std::vector<double>& out) {
    for (double& v : out) v = io::get_f64(is);
    if (!is) throw IoError("truncated field file: " + path.string());
  };
  switch (kind) {
    case FieldKind::scalar:
    case FieldKind::scalar_mean_zero: {
      ScalarField f(g, 0.0, kind == FieldKind::scalar_mean_zero);
      read_block(f.values);
      return f;
    }
    case FieldKind::vector: {
      VectorField f(g);
      for (auto& c : f.components) read_block(c);
      return f;
    }
  }
  throw IoError("unknown field kind in " + path.string());
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& f) {
  auto os = open_out(path, false);
  os << std::setprecision(17);
  write_csv_header(os, f.grid);
  os << "value\n";
  for (std::size_t c = 0; c < f.grid.cells(); ++c) {
    write_csv_prefix(os, f.grid, c);
    os << f.values[c] << '\n';
  }
}

void write_field_csv(const std::filesystem::path& path, const VectorField& f) {
  auto os = open_out(path, false);
  os << std::setprecision(17);
  write_csv_header(os, f.grid);
  os << (f.grid.dim() == 2 ? "e1,e2\n" : "e1,e2,e3\n");
  for (std::size_t c = 0; c < f.grid.cells(); ++c) {
    write_csv_prefix(os, f.grid, c);
    for (int a = 0; a < f.grid.dim(); ++a) os << (a ? "," : "") << f.components[static_cast<std::size_t>(a)][c];
    os << '\n';
  }
}

}  // namespace vpme
