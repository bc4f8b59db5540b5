#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gdim/graph.hpp"
#include "gdim/rng.hpp"

namespace gdim::test {

inline std::span<const double> col(const Eigen::MatrixXd& m, Eigen::Index j) {
  return {m.col(j).data(), static_cast<std::size_t>(m.rows())};
}

inline std::span<const double> span_of(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

// Symmetric multigraph with each unordered pair present with probability
// `density` and weight uniform in [1, max_weight].
inline SparseGraph random_symmetric(std::size_t n, double density, std::uint64_t seed, int max_weight = 3,
                                    bool loops = true) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> w(1, max_weight);
  std::vector<Triple> t;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = loops ? i : i + 1; j < n; ++j)
      if (u(eng) < density) t.push_back({i, j, static_cast<double>(w(eng))});
  return from_edge_list(n, n, t, Symmetry::kSymmetric);
}

inline SparseGraph random_general(std::size_t rows, std::size_t cols, double density, std::uint64_t seed,
                                  int max_weight = 3) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> w(1, max_weight);
  std::vector<Triple> t;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (u(eng) < density) t.push_back({i, j, static_cast<double>(w(eng))});
  return from_edge_list(rows, cols, t, Symmetry::kGeneral);
}

inline Eigen::VectorXd random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> z;
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = z(eng);
  return v;
}

inline Eigen::VectorXd random_unit(std::size_t n, std::uint64_t seed) {
  Eigen::VectorXd v = random_vector(n, seed);
  return v / v.norm();
}

// Random n x k matrix with orthonormal columns.
inline Eigen::MatrixXd random_orthonormal(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = z(eng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(g.rows(), g.cols());
}

}  // namespace gdim::test
