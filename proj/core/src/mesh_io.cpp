#include "curvrig/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "curvrig/errors.hpp"

namespace curvrig {
namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      for (std::string t; ss >> t;) tokens.push_back(t);
      if (!tokens.empty()) return tokens;
    }
    fail("unexpected end of file");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw InputError("mesh line " + std::to_string(line_no_) + ": " + msg);
  }

  double real(const std::string& s) const {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      fail("expected a number, got '" + s + "'");
    }
    if (pos != s.size()) fail("expected a number, got '" + s + "'");
    return v;
  }

  std::size_t index(const std::string& s) const {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative");
      v = std::stoull(s, &pos);
    } catch (const std::exception&) {
      fail("expected a non-negative integer, got '" + s + "'");
    }
    if (pos != s.size()) fail("expected a non-negative integer, got '" + s + "'");
    return static_cast<std::size_t>(v);
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

}  // namespace

Mesh read_mesh(std::istream& in) {
  LineReader reader(in);
  const auto header = reader.next();
  if (header.size() != 3) reader.fail("header must read 'nV nC nB'");
  const std::size_t nv = reader.index(header[0]);
  const std::size_t nc = reader.index(header[1]);
  const std::size_t nb = reader.index(header[2]);
  if (nv == 0 || nc == 0) reader.fail("mesh needs at least one vertex and one cell");

  Mesh mesh;
  for (std::size_t v = 0; v < nv; ++v) {
    const auto t = reader.next();
    if (v == 0) {
      if (t.empty() || t.size() > 3) reader.fail("vertex dimension must be 1, 2 or 3");
      mesh.dim = static_cast<int>(t.size());
    } else if (t.size() != static_cast<std::size_t>(mesh.dim)) {
      reader.fail("expected " + std::to_string(mesh.dim) + " coordinates");
    }
    for (const auto& s : t) mesh.coords.push_back(reader.real(s));
  }
  for (std::size_t c = 0; c < nc; ++c) {
    const auto t = reader.next();
    if (t.size() != static_cast<std::size_t>(mesh.dim + 1)) {
      reader.fail("expected " + std::to_string(mesh.dim + 1) + " vertex indices per cell");
    }
    for (const auto& s : t) {
      const auto idx = reader.index(s);
      if (idx >= nv) reader.fail("vertex index " + s + " out of range");
      mesh.cells.push_back(idx);
    }
  }
  std::size_t read = 0;
  while (read < nb) {
    for (const auto& s : reader.next()) {
      const auto idx = reader.index(s);
      if (idx >= nv) reader.fail("boundary index " + s + " out of range");
      mesh.boundary.push_back(idx);
      ++read;
    }
  }
  if (read != nb) reader.fail("boundary index count does not match header");
  return mesh;
}

Mesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open mesh file " + path.string());
  return read_mesh(in);
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << mesh.vertex_count() << ' ' << mesh.cell_count() << ' ' << mesh.boundary.size() << '\n';
  char buf[32];
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const auto x = mesh.vertex(v);
    for (int k = 0; k < mesh.dim; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", x[k]);
      out << (k ? " " : "") << buf;
    }
    out << '\n';
  }
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
    const auto cell = mesh.cell(c);
    for (std::size_t k = 0; k < cell.size(); ++k) out << (k ? " " : "") << cell[k];
    out << '\n';
  }
  for (auto b : mesh.boundary) out << b << '\n';
}

void write_mesh(const std::filesystem::path& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write mesh file " + path.string());
  write_mesh(out, mesh);
}

}  // namespace curvrig
