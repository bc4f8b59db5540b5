#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Dense>

#include "gdim/graph.hpp"
#include "gdim/rng.hpp"

namespace gdim {

enum class SpectralMode { kEigen, kSvd };

/// Leading eigenpairs (or singular triplets) sorted non-increasing. In svd
/// mode `vectors` holds right singular vectors and `left_vectors` the left
/// ones. Every column of `vectors` has its largest-magnitude entry positive.
struct SpectralBasis {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  Eigen::MatrixXd left_vectors;
  SpectralMode mode = SpectralMode::kEigen;
  /// False when the iteration budget ran out; the columns are then unusable.
  bool converged = true;
  std::size_t matvecs = 0;
  std::size_t restarts = 0;
};

struct EigenOptions {
  /// Residual target: ||M v - λ v|| <= tol * max(1, |λ|).
  double tol = 1e-10;
  std::size_t max_restarts = 2000;
  Seed seed = 0;
  /// Krylov basis size; 0 picks max(2m + 10, m + 30), capped at n.
  std::size_t krylov_dim = 0;
};

/// y = M x for a symmetric operator of dimension `dim`.
struct SymmetricOperator {
  std::size_t dim = 0;
  std::function<void(std::span<const double>, std::span<double>)> apply;
};

/// The m algebraically largest eigenpairs by thick-restart Lanczos with full
/// reorthogonalization. The start vector is drawn from `opts.seed`.
SpectralBasis top_eigen(const SymmetricOperator& op, std::size_t m, const EigenOptions& opts = {});
SpectralBasis top_eigen(const SparseGraph& g, std::size_t m, const EigenOptions& opts = {});

/// The m largest singular triplets of a (possibly rectangular) matrix, from
/// the eigenpairs of the smaller Gram operator.
SpectralBasis top_svd(const SparseGraph& g, std::size_t m, const EigenOptions& opts = {});

inline constexpr std::size_t kDenseOracleLimit = 2000;

/// Full decomposition of a dense symmetric matrix (Householder tridiagonal
/// reduction + implicit QR). Values sorted non-increasing.
SpectralBasis dense_eigen_oracle(const Eigen::MatrixXd& M);

/// Full thin SVD of a dense matrix (one-sided Jacobi).
SpectralBasis dense_svd_oracle(const Eigen::MatrixXd& M);

/// Dense copy of a sparse graph.
Eigen::MatrixXd to_dense(const SparseGraph& g);

/// Sine of the largest principal angle between span(X) and span(Y); both
/// inputs must have orthonormal columns.
double max_principal_angle_sin(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

/// Flips each column so its largest-magnitude entry (first on ties) is positive.
/// Returns the applied signs.
Eigen::VectorXd normalize_signs(Eigen::MatrixXd& vectors);

}  // namespace gdim
