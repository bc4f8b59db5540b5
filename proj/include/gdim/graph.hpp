#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gdim/kernels.hpp"

namespace gdim {

enum class Symmetry { kSymmetric, kGeneral };

struct Triple {
  std::size_t row = 0;
  std::size_t col = 0;
  double weight = 0.0;
};

/// Nonnegative sparse matrix in compressed-row form, square and symmetric for
/// undirected graphs or rectangular/asymmetric otherwise. Entries are strictly
/// positive, column indices are sorted within each row, and self-loops are
/// stored once on the diagonal. Immutable after construction.
class SparseGraph {
 public:
  SparseGraph() = default;

  /// Adopts compressed-row arrays after validating every invariant above
  /// (including mirror equality when `symmetry` is kSymmetric).
  static SparseGraph from_csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                              std::vector<std::size_t> col_idx, std::vector<double> values,
                              Symmetry symmetry);

  static SparseGraph empty(std::size_t rows, std::size_t cols, Symmetry symmetry);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool symmetric() const noexcept { return symmetric_; }
  Symmetry symmetry() const noexcept { return symmetric_ ? Symmetry::kSymmetric : Symmetry::kGeneral; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
  std::span<const double> values() const noexcept { return values_; }
  kernels::CsrView view() const noexcept { return {rows_, cols_, row_ptr_, col_idx_, values_}; }

  /// Stored weight at (i, j), zero when absent. O(log row length).
  double at(std::size_t i, std::size_t j) const;

  /// All stored entries in row-major order.
  std::vector<Triple> triples() const;

  double total_weight() const;
  bool is_integral() const;
  SparseGraph transpose() const;

  bool operator==(const SparseGraph&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  bool symmetric_ = false;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

/// Builds a graph from (i, j, w) triples. Duplicates are summed and zero
/// weights dropped. With kSymmetric, an unordered pair given in only one
/// orientation is mirrored; a pair given in both orientations must agree.
SparseGraph from_edge_list(std::size_t rows, std::size_t cols, std::span<const Triple> triples,
                           Symmetry symmetry);

/// Entrywise sum of two graphs of identical shape and symmetry.
SparseGraph add(const SparseGraph& a, const SparseGraph& b);

struct DegreeVector {
  std::vector<double> d;

  double sum() const;
  std::size_t size() const noexcept { return d.size(); }
};

/// Row sums of the stored matrix; a self-loop contributes its stored weight once.
DegreeVector degrees(const SparseGraph& g);

/// D A D with D_ii = (d_i + tau)^{-1/2} and tau the mean degree of `g`.
/// Throws NumericError for a graph without edges.
SparseGraph regularized_laplacian(const SparseGraph& g);

/// x^T g y over stored entries.
double quadratic_form(const SparseGraph& g, std::span<const double> x, std::span<const double> y);

/// Binary OR symmetrization: output_ij = 1 iff g_ij > 0 or g_ji > 0.
SparseGraph symmetrize(const SparseGraph& g);

/// y = g x.
void multiply(const SparseGraph& g, std::span<const double> x, std::span<double> y);

}  // namespace gdim
