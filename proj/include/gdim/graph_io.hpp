#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "gdim/graph.hpp"

namespace gdim::io {

enum class Format { kEdgeList, kMatrixMarket };

/// How a parsed matrix becomes a graph. kUndirected mirrors one-sided entries
/// (and rejects conflicting mirrors); kSymmetrize applies binary OR
/// symmetrization; kRectangular keeps the matrix as given.
enum class InputMode { kUndirected, kSymmetrize, kRectangular };

struct RawMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Triple> entries;
  /// Matrix Market `symmetric` files store one triangle only.
  bool declared_symmetric = false;
};

/// Whitespace-separated `i j [w]` lines with 0-based indices; `#` starts a
/// comment. An optional `# dimensions: R C` line fixes the shape, otherwise it
/// is inferred from the largest indices.
RawMatrix parse_edge_list(std::istream& in);

/// `%%MatrixMarket matrix coordinate {pattern|integer|real} {general|symmetric}`
/// with 1-based indices.
RawMatrix parse_matrix_market(std::istream& in);

RawMatrix read_matrix(const std::string& path, Format format);

SparseGraph to_graph(const RawMatrix& raw, InputMode mode);

/// Symmetric graphs are written as their upper triangle (i <= j).
void write_edge_list(std::ostream& out, const SparseGraph& g);

/// Symmetric graphs are written as their lower triangle with the `symmetric` qualifier.
void write_matrix_market(std::ostream& out, const SparseGraph& g);

Format parse_format(const std::string& name);

}  // namespace gdim::io
