#include "gdim/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "gdim/error.hpp"

namespace gdim {

namespace {

void check_dims(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got)
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (expected " + std::to_string(expected) +
                                ", got " + std::to_string(got) + ")");
}

// Sorts (row, col) keys, sums duplicates, drops zeros, emits CSR.
SparseGraph assemble(std::size_t rows, std::size_t cols, std::vector<Triple> entries, Symmetry symmetry) {
  std::sort(entries.begin(), entries.end(),
            [](const Triple& a, const Triple& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  std::vector<std::size_t> row_ptr(rows + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<double> values;
  col_idx.reserve(entries.size());
  values.reserve(entries.size());
  std::size_t k = 0;
  while (k < entries.size()) {
    const std::size_t r = entries[k].row;
    const std::size_t c = entries[k].col;
    double w = 0.0;
    for (; k < entries.size() && entries[k].row == r && entries[k].col == c; ++k) w += entries[k].weight;
    if (w > 0.0) {
      col_idx.push_back(c);
      values.push_back(w);
      ++row_ptr[r + 1];
    }
  }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  return SparseGraph::from_csr(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values), symmetry);
}

}  // namespace

SparseGraph SparseGraph::from_csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                                  std::vector<std::size_t> col_idx, std::vector<double> values,
                                  Symmetry symmetry) {
  if (row_ptr.size() != rows + 1 || row_ptr.front() != 0 || row_ptr.back() != values.size() ||
      col_idx.size() != values.size())
    throw std::invalid_argument("from_csr: inconsistent compressed-row arrays");
  if (symmetry == Symmetry::kSymmetric && rows != cols)
    throw std::invalid_argument("from_csr: symmetric graph must be square");
  for (std::size_t i = 0; i < rows; ++i) {
    if (row_ptr[i] > row_ptr[i + 1]) throw std::invalid_argument("from_csr: row pointers decrease");
    for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      if (col_idx[p] >= cols) throw std::invalid_argument("from_csr: column index out of range");
      if (p > row_ptr[i] && col_idx[p] <= col_idx[p - 1])
        throw std::invalid_argument("from_csr: columns not strictly increasing");
      if (!(values[p] > 0.0) || !std::isfinite(values[p]))
        throw std::invalid_argument("from_csr: weights must be positive and finite");
    }
  }
  SparseGraph g;
  g.rows_ = rows;
  g.cols_ = cols;
  g.symmetric_ = symmetry == Symmetry::kSymmetric;
  g.row_ptr_ = std::move(row_ptr);
  g.col_idx_ = std::move(col_idx);
  g.values_ = std::move(values);
  if (g.symmetric_) {
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t p = g.row_ptr_[i]; p < g.row_ptr_[i + 1]; ++p)
        if (g.at(g.col_idx_[p], i) != g.values_[p]) throw std::invalid_argument("from_csr: matrix is not symmetric");
  }
  return g;
}

SparseGraph SparseGraph::empty(std::size_t rows, std::size_t cols, Symmetry symmetry) {
  return from_csr(rows, cols, std::vector<std::size_t>(rows + 1, 0), {}, {}, symmetry);
}

double SparseGraph::at(std::size_t i, std::size_t j) const {
  if (i >= rows_ || j >= cols_) throw std::out_of_range("SparseGraph::at: index out of range");
  const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

std::vector<Triple> SparseGraph::triples() const {
  std::vector<Triple> out;
  out.reserve(nnz());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) out.push_back({i, col_idx_[p], values_[p]});
  return out;
}

double SparseGraph::total_weight() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

bool SparseGraph::is_integral() const {
  return std::all_of(values_.begin(), values_.end(), [](double w) { return std::floor(w) == w; });
}

SparseGraph SparseGraph::transpose() const {
  if (symmetric_) return *this;
  std::vector<std::size_t> row_ptr(cols_ + 1, 0);
  for (std::size_t c : col_idx_) ++row_ptr[c + 1];
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  std::vector<std::size_t> next(row_ptr.begin(), row_ptr.end() - 1);
  std::vector<std::size_t> col_idx(nnz());
  std::vector<double> values(nnz());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      const std::size_t dst = next[col_idx_[p]]++;
      col_idx[dst] = i;
      values[dst] = values_[p];
    }
  return from_csr(cols_, rows_, std::move(row_ptr), std::move(col_idx), std::move(values), Symmetry::kGeneral);
}

SparseGraph from_edge_list(std::size_t rows, std::size_t cols, std::span<const Triple> triples, Symmetry symmetry) {
  if (symmetry == Symmetry::kSymmetric && rows != cols)
    throw std::invalid_argument("from_edge_list: symmetric graph requires rows == cols");
  for (const Triple& t : triples) {
    if (t.row >= rows || t.col >= cols)
      throw std::invalid_argument("from_edge_list: index (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                                  ") out of range");
    if (!(t.weight >= 0.0) || !std::isfinite(t.weight))
      throw std::invalid_argument("from_edge_list: weights must be nonnegative and finite");
  }
  if (symmetry == Symmetry::kGeneral) return assemble(rows, cols, {triples.begin(), triples.end()}, symmetry);

  // Sum each orientation separately, then reconcile the two halves.
  std::map<std::pair<std::size_t, std::size_t>, double> directed;
  for (const Triple& t : triples) directed[{t.row, t.col}] += t.weight;
  std::vector<Triple> entries;
  entries.reserve(2 * directed.size());
  for (const auto& [key, w] : directed) {
    const auto [i, j] = key;
    if (i == j) {
      entries.push_back({i, j, w});
      continue;
    }
    const auto mirror = directed.find({j, i});
    if (mirror == directed.end()) {
      entries.push_back({i, j, w});
      entries.push_back({j, i, w});
    } else if (i < j) {
      if (mirror->second != w)
        throw std::invalid_argument("from_edge_list: entries (" + std::to_string(i) + ", " + std::to_string(j) +
                                    ") and its mirror disagree; symmetrize or treat the input as rectangular");
      entries.push_back({i, j, w});
      entries.push_back({j, i, w});
    }
  }
  return assemble(rows, cols, std::move(entries), symmetry);
}

SparseGraph add(const SparseGraph& a, const SparseGraph& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.symmetric() != b.symmetric())
    throw std::invalid_argument("add: shape or symmetry mismatch");
  std::vector<Triple> entries = a.triples();
  const auto tb = b.triples();
  entries.insert(entries.end(), tb.begin(), tb.end());
  return assemble(a.rows(), a.cols(), std::move(entries), a.symmetry());
}

double DegreeVector::sum() const { return std::accumulate(d.begin(), d.end(), 0.0); }

DegreeVector degrees(const SparseGraph& g) {
  DegreeVector out{std::vector<double>(g.rows(), 0.0)};
  const auto rp = g.row_ptr();
  const auto vals = g.values();
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) out.d[i] += vals[p];
  return out;
}

SparseGraph regularized_laplacian(const SparseGraph& g) {
  if (!g.symmetric()) throw std::invalid_argument("regularized_laplacian: graph must be symmetric");
  const DegreeVector deg = degrees(g);
  const double n = static_cast<double>(g.rows());
  const double tau = g.rows() == 0 ? 0.0 : deg.sum() / n;
  if (!(tau > 0.0)) throw NumericError("regularized_laplacian: graph has no edges");
  std::vector<double> scale(g.rows());
  for (std::size_t i = 0; i < g.rows(); ++i) scale[i] = 1.0 / std::sqrt(deg.d[i] + tau);
  std::vector<double> values(g.values().begin(), g.values().end());
  const auto rp = g.row_ptr();
  const auto ci = g.col_idx();
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) values[p] *= scale[i] * scale[ci[p]];
  return SparseGraph::from_csr(g.rows(), g.cols(), {rp.begin(), rp.end()}, {ci.begin(), ci.end()},
                               std::move(values), Symmetry::kSymmetric);
}

double quadratic_form(const SparseGraph& g, std::span<const double> x, std::span<const double> y) {
  check_dims(g.rows(), x.size(), "quadratic_form (left vector)");
  check_dims(g.cols(), y.size(), "quadratic_form (right vector)");
  return kernels::parallel::bilinear(g.view(), x, y);
}

SparseGraph symmetrize(const SparseGraph& g) {
  if (g.rows() != g.cols()) throw std::invalid_argument("symmetrize: matrix must be square");
  std::vector<Triple> entries;
  entries.reserve(2 * g.nnz());
  for (const Triple& t : g.triples()) {
    entries.push_back({t.row, t.col, 1.0});
    if (t.row != t.col) entries.push_back({t.col, t.row, 1.0});
  }
  // Pairs present in both orientations arrive twice; clamp back to one.
  SparseGraph summed = assemble(g.rows(), g.cols(), std::move(entries), Symmetry::kGeneral);
  std::vector<double> ones(summed.nnz(), 1.0);
  return SparseGraph::from_csr(g.rows(), g.cols(), {summed.row_ptr().begin(), summed.row_ptr().end()},
                               {summed.col_idx().begin(), summed.col_idx().end()}, std::move(ones),
                               Symmetry::kSymmetric);
}

void multiply(const SparseGraph& g, std::span<const double> x, std::span<double> y) {
  check_dims(g.cols(), x.size(), "multiply (input)");
  check_dims(g.rows(), y.size(), "multiply (output)");
  kernels::parallel::spmv(g.view(), x, y);
}

}  // namespace gdim
