#pragma once

#include <filesystem>
#include <iosfwd>

#include "curvrig/domain.hpp"

namespace curvrig {

// Plain-text mesh format:
//   nV nC nB
//   nV lines of vertex coordinates (the token count fixes the dimension)
//   nC lines of 0-based simplex vertex indices
//   nB boundary vertex indices, one per line
//
// Parse errors throw InputError with the offending line number.
Mesh read_mesh(std::istream& in);
Mesh read_mesh(const std::filesystem::path& path);

void write_mesh(std::ostream& out, const Mesh& mesh);
void write_mesh(const std::filesystem::path& path, const Mesh& mesh);

}  // namespace curvrig
