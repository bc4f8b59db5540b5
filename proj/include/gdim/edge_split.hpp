#pragma once

#include <cstddef>
#include <vector>

#include "gdim/graph.hpp"
#include "gdim/randgraph.hpp"
#include "gdim/rng.hpp"

namespace gdim {

/// Fitting graph and held-out test graph; fit + test equals the input exactly.
struct SplitPair {
  SparseGraph fit;
  SparseGraph test;
  double epsilon = 0.0;
  Seed seed = 0;
};

/// Binomial thinning of every edge copy: test_ij ~ Binomial(g_ij, epsilon),
/// fit_ij = g_ij - test_ij. Symmetric graphs split each unordered pair once and
/// mirror the outcome. Requires integer weights and 0 < epsilon < 1.
SplitPair split(const SparseGraph& g, double epsilon, Seed seed, Execution exec = Execution::kParallel);

/// `folds` independent re-splits of the same graph, seeded from `seed`.
std::vector<SplitPair> multi_split(const SparseGraph& g, double epsilon, std::size_t folds, Seed seed);

/// Seed used for fold `fold` by multi_split and the cross-validation drivers.
Seed fold_seed(Seed master, std::size_t fold);

}  // namespace gdim
