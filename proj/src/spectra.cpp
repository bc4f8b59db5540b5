#include "gdim/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "gdim/kernels.hpp"

namespace gdim {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::span<const double> cspan(const VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<double> mspan(VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

VectorXd random_unit(std::size_t n, std::mt19937_64& eng) {
  VectorXd v(static_cast<Index>(n));
  for (Index i = 0; i < v.size(); ++i) v(i) = uniform01(eng) - 0.5;
  return v / v.norm();
}

// Two passes of classical Gram-Schmidt against the first `cols` columns of V.
// Returns the accumulated projection coefficients.
VectorXd orthogonalize(const MatrixXd& V, Index cols, VectorXd& w) {
  VectorXd h = VectorXd::Zero(cols);
  for (int pass = 0; pass < 2; ++pass) {
    const VectorXd c = V.leftCols(cols).transpose() * w;
    w.noalias() -= V.leftCols(cols) * c;
    h += c;
  }
  return h;
}

}  // namespace

Eigen::VectorXd normalize_signs(MatrixXd& vectors) {
  VectorXd signs = VectorXd::Ones(vectors.cols());
  for (Index j = 0; j < vectors.cols(); ++j) {
    Index best = 0;
    double best_abs = -1.0;
    for (Index i = 0; i < vectors.rows(); ++i) {
      // Tolerance-free first maximum keeps the choice deterministic.
      if (std::abs(vectors(i, j)) > best_abs) {
        best_abs = std::abs(vectors(i, j));
        best = i;
      }
    }
    if (vectors.rows() > 0 && vectors(best, j) < 0.0) {
      vectors.col(j) *= -1.0;
      signs(j) = -1.0;
    }
  }
  return signs;
}

SpectralBasis top_eigen(const SymmetricOperator& op, std::size_t m, const EigenOptions& opts) {
  const std::size_t n = op.dim;
  if (m == 0 || m > n) throw std::invalid_argument("top_eigen: need 1 <= m <= n (m=" + std::to_string(m) +
                                                   ", n=" + std::to_string(n) + ")");
  std::size_t p = opts.krylov_dim == 0 ? std::max(2 * m + 10, m + 30) : opts.krylov_dim;
  p = std::clamp(p, m, n);
  const auto P = static_cast<Index>(p);
  const auto M = static_cast<Index>(m);

  auto eng = stream_engine(opts.seed, Stream::kStart, 0);
  MatrixXd V = MatrixXd::Zero(static_cast<Index>(n), P);
  MatrixXd T = MatrixXd::Zero(P, P);
  V.col(0) = random_unit(n, eng);

  SpectralBasis out;
  Index kept = 0;  // Ritz vectors carried over from the previous cycle
  VectorXd w(static_cast<Index>(n));
  VectorXd residual = VectorXd::Zero(static_cast<Index>(n));
  double beta = 0.0;
  double scale = 0.0;  // running estimate of ||M|| for breakdown detection

  for (std::size_t cycle = 0;; ++cycle) {
    // Extend the basis from column `kept` to P. T accumulates V^T M V.
    for (Index j = kept; j < P; ++j) {
      op.apply(cspan(V.col(j).eval()), mspan(w));
      ++out.matvecs;
      const VectorXd h = orthogonalize(V, j + 1, w);
      for (Index i = 0; i <= j; ++i) T(i, j) = T(j, i) = h(i);
      scale = std::max(scale, std::abs(h(j)));
      beta = w.norm();
      scale = std::max(scale, beta);
      if (j + 1 == P) break;
      if (beta > 1e-12 * std::max(scale, 1.0)) {
        V.col(j + 1) = w / beta;
      } else {
        // Invariant subspace: continue from a fresh direction.
        VectorXd r = random_unit(n, eng);
        orthogonalize(V, j + 1, r);
        const double rn = r.norm();
        if (rn < 1e-8) {  // the basis already spans everything
          beta = 0.0;
          break;
        }
        V.col(j + 1) = r / rn;
      }
    }
    residual = w;

    Eigen::SelfAdjointEigenSolver<MatrixXd> ritz(T);
    // Eigen sorts ascending; walk from the top.
    const VectorXd& theta = ritz.eigenvalues();
    const MatrixXd& S = ritz.eigenvectors();
    bool done = true;
    for (Index r = 0; r < M; ++r) {
      const Index c = P - 1 - r;
      const double res = beta * std::abs(S(P - 1, c));
      if (res > opts.tol * std::max(1.0, std::abs(theta(c)))) done = false;
    }
    if (beta == 0.0 || p == n) done = true;

    if (done || cycle >= opts.max_restarts) {
      out.values.resize(M);
      MatrixXd top(P, M);
      for (Index r = 0; r < M; ++r) {
        out.values(r) = theta(P - 1 - r);
        top.col(r) = S.col(P - 1 - r);
      }
      out.vectors = V * top;
      // Re-normalize against accumulated rounding.
      for (Index r = 0; r < M; ++r) out.vectors.col(r).normalize();
      normalize_signs(out.vectors);
      out.converged = done;
      out.restarts = cycle;
      return out;
    }

    // Thick restart: keep the leading Ritz vectors plus a cushion.
    const Index keep = std::min<Index>(P - 1, M + (P - M) / 2);
    MatrixXd top(P, keep);
    VectorXd kept_theta(keep);
    for (Index r = 0; r < keep; ++r) {
      top.col(r) = S.col(P - 1 - r);
      kept_theta(r) = theta(P - 1 - r);
    }
    MatrixXd kept_vectors = V * top;
    V.setZero();
    V.leftCols(keep) = kept_vectors;
    T.setZero();
    for (Index r = 0; r < keep; ++r) T(r, r) = kept_theta(r);
    VectorXd next = residual / beta;
    orthogonalize(V, keep, next);
    V.col(keep) = next / next.norm();
    kept = keep;
  }
}

SpectralBasis top_eigen(const SparseGraph& g, std::size_t m, const EigenOptions& opts) {
  if (!g.symmetric()) throw std::invalid_argument("top_eigen: graph must be symmetric");
  const auto view = g.view();
  SymmetricOperator op{g.rows(), [view](std::span<const double> x, std::span<double> y) {
                         kernels::parallel::spmv(view, x, y);
                       }};
  return top_eigen(op, m, opts);
}

SpectralBasis top_svd(const SparseGraph& g, std::size_t m, const EigenOptions& opts) {
  const std::size_t r = g.rows();
  const std::size_t c = g.cols();
  if (m == 0 || m > std::min(r, c)) throw std::invalid_argument("top_svd: need 1 <= m <= min(rows, cols)");
  const SparseGraph gt = g.transpose();
  // Gram operator on the smaller side: (G G^T) when rows <= cols.
  const bool left_gram = r <= c;
  const SparseGraph& outer = left_gram ? gt : g;   // applied first
  const SparseGraph& inner = left_gram ? g : gt;   // applied second
  const std::size_t dim = left_gram ? r : c;
  const std::size_t mid = left_gram ? c : r;
  auto buffer = std::make_shared<std::vector<double>>(mid);
  const auto ov = outer.view();
  const auto iv = inner.view();
  SymmetricOperator gram{dim, [ov, iv, buffer](std::span<const double> x, std::span<double> y) {
                           kernels::parallel::spmv(ov, x, *buffer);
                           kernels::parallel::spmv(iv, *buffer, y);
                         }};
  SpectralBasis eig = top_eigen(gram, m, opts);

  const auto M = static_cast<Index>(m);
  SpectralBasis out;
  out.mode = SpectralMode::kSvd;
  out.converged = eig.converged;
  out.matvecs = eig.matvecs;
  out.restarts = eig.restarts;
  out.values.resize(M);
  MatrixXd gram_vecs = eig.vectors;  // left (rows<=cols) or right singular vectors
  MatrixXd other(static_cast<Index>(mid), M);
  auto eng = stream_engine(opts.seed, Stream::kStart, 1);
  const double top = std::sqrt(std::max(eig.values(0), 0.0));
  for (Index j = 0; j < M; ++j) {
    VectorXd y(static_cast<Index>(mid));
    const VectorXd x = gram_vecs.col(j);
    kernels::parallel::spmv(ov, cspan(x), mspan(y));
    const double sigma = y.norm();
    out.values(j) = sigma;
    if (sigma > 1e-12 * std::max(top, 1.0)) {
      other.col(j) = y / sigma;
    } else {
      // Null direction: any unit vector orthogonal to the previous ones.
      VectorXd rv = random_unit(mid, eng);
      orthogonalize(other, j, rv);
      other.col(j) = rv / rv.norm();
    }
  }
  MatrixXd right = left_gram ? other : gram_vecs;
  MatrixXd left = left_gram ? gram_vecs : other;
  const VectorXd signs = normalize_signs(right);
  for (Index j = 0; j < M; ++j) left.col(j) *= signs(j);
  out.vectors = std::move(right);
  out.left_vectors = std::move(left);
  return out;
}

SpectralBasis dense_eigen_oracle(const MatrixXd& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("dense_eigen_oracle: matrix must be square");
  if (static_cast<std::size_t>(M.rows()) > kDenseOracleLimit)
    throw std::invalid_argument("dense_eigen_oracle: n exceeds " + std::to_string(kDenseOracleLimit));
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(M);
  if (solver.info() != Eigen::Success) throw std::runtime_error("dense_eigen_oracle: decomposition failed");
  SpectralBasis out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  normalize_signs(out.vectors);
  return out;
}

SpectralBasis dense_svd_oracle(const MatrixXd& M) {
  if (static_cast<std::size_t>(std::max(M.rows(), M.cols())) > kDenseOracleLimit)
    throw std::invalid_argument("dense_svd_oracle: dimension exceeds " + std::to_string(kDenseOracleLimit));
  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SpectralBasis out;
  out.mode = SpectralMode::kSvd;
  out.values = svd.singularValues();
  out.vectors = svd.matrixV();
  out.left_vectors = svd.matrixU();
  const VectorXd signs = normalize_signs(out.vectors);
  for (Index j = 0; j < out.left_vectors.cols(); ++j) out.left_vectors.col(j) *= signs(j);
  return out;
}

MatrixXd to_dense(const SparseGraph& g) {
  MatrixXd D = MatrixXd::Zero(static_cast<Index>(g.rows()), static_cast<Index>(g.cols()));
  for (const Triple& t : g.triples()) D(static_cast<Index>(t.row), static_cast<Index>(t.col)) = t.weight;
  return D;
}

double max_principal_angle_sin(const MatrixXd& X, const MatrixXd& Y) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols())
    throw std::invalid_argument("max_principal_angle_sin: shape mismatch");
  const MatrixXd R = Y - X * (X.transpose() * Y);
  if (R.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(R);
  return std::min(1.0, svd.singularValues()(0));
}

}  // namespace gdim
