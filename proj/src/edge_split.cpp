#include "gdim/edge_split.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace gdim {

namespace {

SparseGraph with_values(const SparseGraph& shape, const std::vector<double>& values) {
  const auto rp = shape.row_ptr();
  const auto ci = shape.col_idx();
  std::vector<std::size_t> row_ptr(shape.rows() + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<double> vals;
  for (std::size_t i = 0; i < shape.rows(); ++i) {
    for (std::size_t p = rp[i]; p < rp[i + 1]; ++p)
      if (values[p] > 0.0) {
        col_idx.push_back(ci[p]);
        vals.push_back(values[p]);
      }
    row_ptr[i + 1] = col_idx.size();
  }
  return SparseGraph::from_csr(shape.rows(), shape.cols(), std::move(row_ptr), std::move(col_idx), std::move(vals),
                               shape.symmetry());
}

}  // namespace

SplitPair split(const SparseGraph& g, double epsilon, Seed seed, Execution exec) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("split: epsilon must lie in (0, 1)");
  if (!g.is_integral()) throw std::invalid_argument("split: edge weights must be integer counts");

  const auto rp = g.row_ptr();
  const auto ci = g.col_idx();
  const auto vals = g.values();
  std::vector<double> test(g.nnz(), 0.0);

  auto split_row = [&](std::size_t i) {
    auto eng = stream_engine(seed, Stream::kSplit, i);
    for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) {
      if (g.symmetric() && ci[p] < i) continue;
      test[p] = static_cast<double>(binomial_draw(eng, static_cast<std::uint64_t>(vals[p]), epsilon));
    }
  };
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 32)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(g.rows()); ++i) split_row(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < g.rows(); ++i) split_row(i);
  }

  if (g.symmetric()) {
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t p = rp[i]; p < rp[i + 1]; ++p)
        if (ci[p] < i) {
          // Mirror from the upper-triangle entry (ci[p], i).
          const std::size_t j = ci[p];
          const auto first = ci.begin() + static_cast<std::ptrdiff_t>(rp[j]);
          const auto last = ci.begin() + static_cast<std::ptrdiff_t>(rp[j + 1]);
          const auto q = static_cast<std::size_t>(std::lower_bound(first, last, i) - ci.begin());
          test[p] = test[q];
        }
  }

  std::vector<double> fit(g.nnz());
  for (std::size_t p = 0; p < g.nnz(); ++p) fit[p] = vals[p] - test[p];
  return SplitPair{with_values(g, fit), with_values(g, test), epsilon, seed};
}

Seed fold_seed(Seed master, std::size_t fold) { return derive_seed(master, Stream::kFold, fold); }

std::vector<SplitPair> multi_split(const SparseGraph& g, double epsilon, std::size_t folds, Seed seed) {
  if (folds < 1) throw std::invalid_argument("multi_split: folds must be at least 1");
  std::vector<SplitPair> out;
  out.reserve(folds);
  for (std::size_t f = 0; f < folds; ++f) out.push_back(split(g, epsilon, fold_seed(seed, f)));
  return out;
}

}  // namespace gdim
