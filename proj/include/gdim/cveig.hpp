#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gdim/graph.hpp"
#include "gdim/randgraph.hpp"
#include "gdim/rng.hpp"

namespace gdim {

enum class MatrixMode { kLaplacian, kAdjacency };

/// Denominator of the singular-vector statistic. kSquared uses
/// sqrt(eps (u∘u)^T A (v∘v)), the Poisson variance of u^T A_test v.
/// kAsPrinted uses sqrt(eps (u∘u)^T A v) with v unsquared.
enum class RectangularVariance { kSquared, kAsPrinted };

struct CvParams {
  double epsilon = 0.05;
  std::size_t k_max = 15;
  std::size_t folds = 10;
  double alpha = 0.05;
  MatrixMode matrix_mode = MatrixMode::kLaplacian;
  Seed seed = 0;
  /// Benjamini-Hochberg adjustment of the component p-values before the
  /// dimension rule is applied.
  bool bh_correction = false;
  RectangularVariance rectangular_variance = RectangularVariance::kSquared;
  /// Keep each fold's eigenvectors (or right singular vectors) in the report.
  bool keep_vectors = false;
  double eigen_tol = 1e-9;
  std::size_t eigen_max_restarts = 2000;
};

struct CvFoldStat {
  std::size_t fold = 0;
  std::size_t component = 0;
  double lambda_test = 0.0;
  double sigma = 0.0;
  double t = 0.0;
  /// Delocalization gate ||x||_inf^2 <= min(sigma^2 / log^2 n, log n / n),
  /// recorded but not enforced by eigcv.
  bool deloc_pass = false;
  /// sigma == 0: the vector is supported off every edge.
  bool degenerate = false;
  /// Eigenvalue (or singular value) of the fitting operator.
  double eigenvalue = 0.0;
  /// x^T A_fit x (u^T A_fit v for singular pairs).
  double lambda_fit = 0.0;
};

struct CvComponent {
  std::size_t index = 0;  // 1-based component number
  double mean_t = 0.0;
  double p = 1.0;
  double p_adjusted = 1.0;
  bool degenerate = false;
  std::vector<CvFoldStat> folds;
};

struct DimensionEstimate {
  std::size_t k_hat = 1;
  /// Every tested component was significant; the true dimension may exceed k_max.
  bool censored = false;
};

struct CvReport {
  CvParams params;
  bool rectangular = false;
  std::size_t rows = 0;
  std::size_t cols = 0;
  /// Components 2..k_max in order.
  std::vector<CvComponent> components;
  DimensionEstimate estimate;
  std::vector<std::string> warnings;
  std::vector<Eigen::MatrixXd> fold_vectors;
};

/// x^T A_test x. Requires ||x|| = 1 within 1e-8.
double lambda_test(std::span<const double> x, const SparseGraph& a_test);

/// sqrt(2 eps (x∘x)^T A (x∘x) - eps (x∘x)^T diag(A) (x∘x)) on the full graph.
double sigma_full(std::span<const double> x, const SparseGraph& a, double epsilon);

/// sqrt(eps/(1-eps) (x∘x)^T (2 A_fit - diag(A_fit)) (x∘x)) on the fitting graph.
double sigma_split(std::span<const double> x, const SparseGraph& a_fit, double epsilon);

struct PairStatistic {
  double lambda_test = 0.0;
  double sigma = 0.0;
  double t = 0.0;
  bool degenerate = false;
};

/// u^T A_test v over the chosen denominator on the full matrix A. With u == v
/// and kSquared the numerator equals the eigenvector statistic's and
/// sigma^2 = (sigma_full^2 + eps (x∘x)^T diag(A) (x∘x)) / 2.
PairStatistic singular_pair_statistic(std::span<const double> u, std::span<const double> v, const SparseGraph& a_test,
                                      const SparseGraph& a, double epsilon, RectangularVariance variance);

double normal_cdf(double t);

/// One-sided upper-tail p-value 1 - Φ(t).
double p_value(double t);

/// Benjamini-Hochberg step-up adjusted p-values, in input order.
std::vector<double> benjamini_hochberg(std::span<const double> p);

/// Dimension rule over p-values of components 2..k_max: k_hat is one less than
/// the first component with p >= alpha; component 1 always counts.
DimensionEstimate estimate_dimension(std::span<const double> p_from_component2, double alpha);

/// Cross-validated eigenvalues over `params.folds` independent edge splits of
/// a symmetric integer-weighted graph.
CvReport eigcv(const SparseGraph& a, const CvParams& params);

/// Singular-vector variant for rectangular or asymmetric matrices.
CvReport eigcv_rectangular(const SparseGraph& a, const CvParams& params);

struct ModifiedComponent {
  std::size_t index = 0;
  double lambda_test = 0.0;
  double sigma = 0.0;
  double t = 0.0;
  double sup_norm_sq = 0.0;
  bool admitted = false;
  bool above_threshold = false;
};

struct ModifiedReport {
  std::size_t k_hat = 0;
  double t_threshold = 0.0;
  double sup_norm_limit = 0.0;  // log(n) / n
  std::vector<ModifiedComponent> components;
};

/// Single-split estimator with an explicit delocalization gate and the
/// threshold sqrt(n log n). Uses adjacency eigenvectors and the fitting-graph
/// variance; log is natural. Components 1..k_max are examined.
ModifiedReport eigcv_modified(const SparseGraph& a, double epsilon, std::size_t k_max, Seed seed);

/// x^T P x.
double lambda_pop(std::span<const double> x, const ExpectedAdjacency& p);

/// diag(X^T P X): the diagonal Γ minimizing ||P - X Γ X^T||_F for orthonormal X.
/// Throws std::invalid_argument when X^T X differs from I by more than 1e-8.
Eigen::VectorXd optimal_diag_reconstruction(const ExpectedAdjacency& p, const Eigen::MatrixXd& xhat);

/// (||x||_inf^2 / <π, x∘x>) / sqrt(m) with π_i = d_i / Σd and m = Σd / 2.
double deloc_diagnostic(std::span<const double> x, const DegreeVector& d);

nlohmann::json to_json(const CvReport& report);
void write_csv(std::ostream& out, const CvReport& report);

MatrixMode parse_matrix_mode(const std::string& name);
std::string to_string(MatrixMode mode);

}  // namespace gdim
