#include "gdim/cveig.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "gdim/edge_split.hpp"
#include "gdim/error.hpp"
#include "gdim/spectra.hpp"

namespace gdim {

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
}

std::span<const double> column(const Eigen::MatrixXd& m, Eigen::Index j) {
  return {m.col(j).data(), static_cast<std::size_t>(m.rows())};
}

void check_params(const CvParams& p, std::size_t dim) {
  check_epsilon(p.epsilon);
  if (p.k_max < 2) throw std::invalid_argument("k_max must be at least 2");
  if (p.k_max > dim) throw std::invalid_argument("k_max exceeds the matrix dimension");
  if (p.folds < 1) throw std::invalid_argument("folds must be at least 1");
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

// Below this multiple of sqrt(eps * max weight) a standard error is rounding
// noise from a vector that is zero on every edge up to solver precision.
constexpr double kDegenerateSigma = 1e-10;

double sigma_floor(const SparseGraph& a, double epsilon) {
  double top = 0.0;
  for (double w : a.values()) top = std::max(top, w);
  return kDegenerateSigma * std::sqrt(epsilon * top);
}

bool deloc_gate(std::span<const double> x, double sigma) {
  const double n = static_cast<double>(x.size());
  const double ln = std::log(n);
  double sup = 0.0;
  for (double v : x) sup = std::max(sup, v * v);
  return sup <= std::min(sigma * sigma / (ln * ln), ln / n);
}

// Everything one fold contributes: per-component statistics plus vectors.
struct FoldResult {
  std::vector<CvFoldStat> stats;
  Eigen::MatrixXd vectors;
};

// Runs `body(f)` for every fold, in parallel when there is more than one, and
// rethrows the first failure after the loop.
template <class Body>
void for_each_fold(std::size_t folds, Body&& body) {
  std::vector<std::exception_ptr> errors(folds);
  const auto nf = static_cast<long>(folds);
#pragma omp parallel for schedule(dynamic) if (folds > 1)
  for (long f = 0; f < nf; ++f) {
    try {
      body(static_cast<std::size_t>(f));
    } catch (...) {
      errors[static_cast<std::size_t>(f)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

CvReport assemble(const CvParams& params, std::size_t rows, std::size_t cols, bool rectangular,
                  std::vector<FoldResult>& folds) {
  CvReport report;
  report.params = params;
  report.rows = rows;
  report.cols = cols;
  report.rectangular = rectangular;
  for (std::size_t c = 2; c <= params.k_max; ++c) {
    CvComponent comp;
    comp.index = c;
    double sum = 0.0;
    for (const auto& fr : folds) {
      const CvFoldStat& s = fr.stats[c - 1];
      comp.folds.push_back(s);
      comp.degenerate = comp.degenerate || s.degenerate;
      sum += s.t;
    }
    comp.mean_t = sum / static_cast<double>(folds.size());
    if (comp.degenerate) {
      comp.p = 1.0;
      report.warnings.push_back("component " + std::to_string(c) +
                                ": zero test-statistic variance in at least one fold; p set to 1");
    } else {
      comp.p = p_value(comp.mean_t);
    }
    report.components.push_back(std::move(comp));
  }
  std::vector<double> p(report.components.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = report.components[i].p;
  const std::vector<double> used = params.bh_correction ? benjamini_hochberg(p) : p;
  for (std::size_t i = 0; i < p.size(); ++i) report.components[i].p_adjusted = used[i];
  report.estimate = estimate_dimension(used, params.alpha);
  if (params.keep_vectors)
    for (auto& fr : folds) report.fold_vectors.push_back(std::move(fr.vectors));
  return report;
}

}  // namespace

double lambda_test(std::span<const double> x, const SparseGraph& a_test) {
  double norm2 = 0.0;
  for (double v : x) norm2 += v * v;
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-8) throw std::invalid_argument("lambda_test: vector is not unit norm");
  return quadratic_form(a_test, x, x);
}

double sigma_full(std::span<const double> x, const SparseGraph& a, double epsilon) {
  check_epsilon(epsilon);
  if (x.size() != a.rows() || a.rows() != a.cols()) throw std::invalid_argument("sigma_full: dimension mismatch");
  const auto v = a.view();
  const double var =
      2.0 * epsilon * kernels::parallel::squared_bilinear(v, x, x) - epsilon * kernels::parallel::diagonal_quartic(v, x);
  return std::sqrt(std::max(var, 0.0));
}

double sigma_split(std::span<const double> x, const SparseGraph& a_fit, double epsilon) {
  check_epsilon(epsilon);
  if (x.size() != a_fit.rows() || a_fit.rows() != a_fit.cols())
    throw std::invalid_argument("sigma_split: dimension mismatch");
  const auto v = a_fit.view();
  const double q = 2.0 * kernels::parallel::squared_bilinear(v, x, x) - kernels::parallel::diagonal_quartic(v, x);
  return std::sqrt(std::max(epsilon / (1.0 - epsilon) * q, 0.0));
}

PairStatistic singular_pair_statistic(std::span<const double> u, std::span<const double> v, const SparseGraph& a_test,
                                      const SparseGraph& a, double epsilon, RectangularVariance variance) {
  check_epsilon(epsilon);
  if (u.size() != a.rows() || v.size() != a.cols() || a_test.rows() != a.rows() || a_test.cols() != a.cols())
    throw std::invalid_argument("singular_pair_statistic: dimension mismatch");
  const auto full = a.view();
  PairStatistic ps;
  ps.lambda_test = quadratic_form(a_test, u, v);
  double var = 0.0;
  if (variance == RectangularVariance::kSquared) {
    var = epsilon * kernels::parallel::squared_bilinear(full, u, v);
  } else {
    std::vector<double> u2(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) u2[i] = u[i] * u[i];
    var = epsilon * kernels::parallel::bilinear(full, u2, v);
  }
  // The unsquared form can be negative; such a component is untestable.
  ps.sigma = var > 0.0 ? std::sqrt(var) : 0.0;
  ps.degenerate = !(ps.sigma > sigma_floor(a, epsilon));
  ps.t = ps.degenerate ? 0.0 : ps.lambda_test / ps.sigma;
  return ps;
}

double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }

double p_value(double t) { return 0.5 * std::erfc(t / std::sqrt(2.0)); }

std::vector<double> benjamini_hochberg(std::span<const double> p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> adj(m);
  double running = 1.0;
  for (std::size_t r = m; r-- > 0;) {
    // Scaling by a ratio >= 1 keeps every adjusted value >= its raw value.
    const double v = p[order[r]] * (static_cast<double>(m) / static_cast<double>(r + 1));
    running = std::min(running, v);
    adj[order[r]] = running;
  }
  return adj;
}

DimensionEstimate estimate_dimension(std::span<const double> p, double alpha) {
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] >= alpha) return {i + 1, false};
  return {p.size() + 1, true};
}

CvReport eigcv(const SparseGraph& a, const CvParams& params) {
  if (!a.symmetric()) throw std::invalid_argument("eigcv: graph must be symmetric; use eigcv_rectangular");
  check_params(params, a.rows());
  const std::size_t k = params.k_max;
  const double floor = sigma_floor(a, params.epsilon);
  std::vector<FoldResult> folds(params.folds);
  for_each_fold(params.folds, [&](std::size_t f) {
    const Seed fs = fold_seed(params.seed, f);
    const SplitPair sp = split(a, params.epsilon, fs);
    EigenOptions opts;
    opts.tol = params.eigen_tol;
    opts.max_restarts = params.eigen_max_restarts;
    opts.seed = derive_seed(fs, Stream::kStart, 0);
    const SpectralBasis basis = params.matrix_mode == MatrixMode::kLaplacian
                                    ? top_eigen(regularized_laplacian(sp.fit), k, opts)
                                    : top_eigen(sp.fit, k, opts);
    if (!basis.converged)
      throw ConvergenceError("eigensolver did not converge in fold " + std::to_string(f), static_cast<int>(f));
    FoldResult& out = folds[f];
    out.stats.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
      const auto x = column(basis.vectors, static_cast<Eigen::Index>(c));
      CvFoldStat& s = out.stats[c];
      s.fold = f;
      s.component = c + 1;
      s.eigenvalue = basis.values(static_cast<Eigen::Index>(c));
      s.lambda_fit = quadratic_form(sp.fit, x, x);
      s.lambda_test = lambda_test(x, sp.test);
      s.sigma = sigma_full(x, a, params.epsilon);
      s.degenerate = !(s.sigma > floor);
      s.t = s.degenerate ? 0.0 : s.lambda_test / s.sigma;
      s.deloc_pass = deloc_gate(x, s.sigma);
    }
    if (params.keep_vectors) out.vectors = basis.vectors;
  });
  return assemble(params, a.rows(), a.cols(), false, folds);
}

CvReport eigcv_rectangular(const SparseGraph& a, const CvParams& params) {
  check_params(params, std::min(a.rows(), a.cols()));
  const std::size_t k = params.k_max;
  std::vector<FoldResult> folds(params.folds);
  for_each_fold(params.folds, [&](std::size_t f) {
    const Seed fs = fold_seed(params.seed, f);
    const SplitPair sp = split(a, params.epsilon, fs);
    EigenOptions opts;
    opts.tol = params.eigen_tol;
    opts.max_restarts = params.eigen_max_restarts;
    opts.seed = derive_seed(fs, Stream::kStart, 0);
    const SpectralBasis basis = top_svd(sp.fit, k, opts);
    if (!basis.converged)
      throw ConvergenceError("singular value solver did not converge in fold " + std::to_string(f),
                             static_cast<int>(f));
    FoldResult& out = folds[f];
    out.stats.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      const auto u = column(basis.left_vectors, ci);
      const auto v = column(basis.vectors, ci);
      CvFoldStat& s = out.stats[c];
      s.fold = f;
      s.component = c + 1;
      s.eigenvalue = basis.values(ci);
      s.lambda_fit = quadratic_form(sp.fit, u, v);
      const PairStatistic ps = singular_pair_statistic(u, v, sp.test, a, params.epsilon, params.rectangular_variance);
      s.lambda_test = ps.lambda_test;
      s.sigma = ps.sigma;
      s.t = ps.t;
      s.degenerate = ps.degenerate;
      s.deloc_pass = deloc_gate(v, s.sigma);
    }
    if (params.keep_vectors) out.vectors = basis.vectors;
  });
  return assemble(params, a.rows(), a.cols(), true, folds);
}

ModifiedReport eigcv_modified(const SparseGraph& a, double epsilon, std::size_t k_max, Seed seed) {
  if (!a.symmetric()) throw std::invalid_argument("eigcv_modified: graph must be symmetric");
  check_epsilon(epsilon);
  if (k_max < 1 || k_max > a.rows()) throw std::invalid_argument("eigcv_modified: k_max out of range");
  const double n = static_cast<double>(a.rows());
  const double ln = std::log(n);
  const Seed fs = fold_seed(seed, 0);
  const SplitPair sp = split(a, epsilon, fs);
  EigenOptions opts;
  opts.tol = 1e-9;
  opts.seed = derive_seed(fs, Stream::kStart, 0);
  const SpectralBasis basis = top_eigen(sp.fit, k_max, opts);
  if (!basis.converged) throw ConvergenceError("eigensolver did not converge", 0);

  ModifiedReport r;
  const double floor = sigma_floor(sp.fit, epsilon);
  r.t_threshold = std::sqrt(n * ln);
  r.sup_norm_limit = ln / n;
  for (std::size_t c = 0; c < k_max; ++c) {
    const auto x = column(basis.vectors, static_cast<Eigen::Index>(c));
    ModifiedComponent mc;
    mc.index = c + 1;
    mc.lambda_test = lambda_test(x, sp.test);
    mc.sigma = sigma_split(x, sp.fit, epsilon);
    for (double v : x) mc.sup_norm_sq = std::max(mc.sup_norm_sq, v * v);
    mc.admitted = mc.sup_norm_sq <= std::min(mc.sigma * mc.sigma / (ln * ln), r.sup_norm_limit);
    mc.t = mc.sigma > floor ? mc.lambda_test / mc.sigma : 0.0;
    mc.above_threshold = mc.t >= r.t_threshold;
    if (mc.admitted && mc.above_threshold) ++r.k_hat;
    r.components.push_back(mc);
  }
  return r;
}

double lambda_pop(std::span<const double> x, const ExpectedAdjacency& p) {
  if (static_cast<Eigen::Index>(x.size()) != p.P.rows()) throw std::invalid_argument("lambda_pop: dimension mismatch");
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  return v.dot(p.P * v);
}

Eigen::VectorXd optimal_diag_reconstruction(const ExpectedAdjacency& p, const Eigen::MatrixXd& xhat) {
  if (xhat.rows() != p.P.rows()) throw std::invalid_argument("optimal_diag_reconstruction: dimension mismatch");
  const Eigen::MatrixXd gram = xhat.transpose() * xhat;
  if ((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("optimal_diag_reconstruction: columns are not orthonormal");
  const Eigen::MatrixXd px = p.P * xhat;
  return (xhat.array() * px.array()).colwise().sum().transpose();
}

double deloc_diagnostic(std::span<const double> x, const DegreeVector& d) {
  if (x.size() != d.size()) throw std::invalid_argument("deloc_diagnostic: dimension mismatch");
  const double total = d.sum();
  if (!(total > 0.0)) throw NumericError("deloc_diagnostic: graph has no edges");
  double sup = 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x2 = x[i] * x[i];
    sup = std::max(sup, x2);
    weighted += d.d[i] / total * x2;
  }
  if (!(weighted > 0.0)) throw NumericError("deloc_diagnostic: vector has no mass on non-isolated nodes");
  return sup / weighted / std::sqrt(total / 2.0);
}

nlohmann::json to_json(const CvReport& report) {
  using nlohmann::json;
  const CvParams& p = report.params;
  json doc;
  doc["params"] = {{"epsilon", p.epsilon},
                   {"k_max", p.k_max},
                   {"folds", p.folds},
                   {"alpha", p.alpha},
                   {"matrix", report.rectangular ? std::string("singular") : to_string(p.matrix_mode)},
                   {"seed", p.seed},
                   {"bh_correction", p.bh_correction}};
  if (report.rectangular)
    doc["params"]["rectangular_variance"] =
        p.rectangular_variance == RectangularVariance::kSquared ? "squared" : "as_printed";
  doc["rows"] = report.rows;
  doc["cols"] = report.cols;
  json comps = json::array();
  for (const auto& c : report.components) {
    json folds = json::array();
    for (const auto& s : c.folds)
      folds.push_back({{"fold", s.fold},
                       {"eigenvalue", s.eigenvalue},
                       {"lambda_fit", s.lambda_fit},
                       {"lambda_test", s.lambda_test},
                       {"sigma", s.sigma},
                       {"t", s.t},
                       {"deloc_pass", s.deloc_pass},
                       {"degenerate", s.degenerate}});
    comps.push_back({{"index", c.index},
                     {"mean_t", c.mean_t},
                     {"p", c.p},
                     {"p_adjusted", c.p_adjusted},
                     {"degenerate", c.degenerate},
                     {"folds", std::move(folds)}});
  }
  doc["components"] = std::move(comps);
  doc["estimate"] = {{"k_hat", report.estimate.k_hat}, {"censored", report.estimate.censored}};
  doc["warnings"] = report.warnings;
  return doc;
}

void write_csv(std::ostream& out, const CvReport& report) {
  out << "index,mean_t,p,p_adjusted,degenerate,mean_lambda_test,mean_sigma\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& c : report.components) {
    double lt = 0.0;
    double sg = 0.0;
    for (const auto& s : c.folds) {
      lt += s.lambda_test;
      sg += s.sigma;
    }
    const double nf = static_cast<double>(c.folds.size());
    out << c.index << ',' << num(c.mean_t) << ',' << num(c.p) << ',' << num(c.p_adjusted) << ','
        << (c.degenerate ? "true" : "false") << ',' << num(lt / nf) << ',' << num(sg / nf) << '\n';
  }
}

MatrixMode parse_matrix_mode(const std::string& name) {
  if (name == "laplacian") return MatrixMode::kLaplacian;
  if (name == "adjacency") return MatrixMode::kAdjacency;
  throw std::invalid_argument("unknown matrix mode '" + name + "' (expected laplacian or adjacency)");
}

std::string to_string(MatrixMode mode) { return mode == MatrixMode::kLaplacian ? "laplacian" : "adjacency"; }

}  // namespace gdim
