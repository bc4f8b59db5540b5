// gdim: estimate graph dimension by cross-validated eigenvalues, draw
// synthetic graphs, and run Monte-Carlo studies.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "gdim/bench.hpp"
#include "gdim/cveig.hpp"
#include "gdim/edge_split.hpp"
#include "gdim/error.hpp"
#include "gdim/graph_io.hpp"
#include "gdim/randgraph.hpp"
#include "gdim/spectra.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 2, kParse = 3, kNumeric = 4 };

struct Config {
  std::string input;
  std::string format = "edgelist";
  double eps = 0.05;
  std::size_t kmax = 15;
  std::size_t folds = 10;
  double alpha = 0.05;
  std::string matrix = "laplacian";
  std::optional<gdim::Seed> seed;
  int threads = 0;
  bool symmetrize = false;
  bool rectangular = false;
  bool bh = false;
  bool as_printed = false;
  std::string output;
  bool json = false;
  std::string model;
  std::string spec;
  std::string timing;
};

// --seed, then GDIM_SEED, then `fallback`.
gdim::Seed resolve_seed(const Config& c, gdim::Seed fallback) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("GDIM_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("GDIM_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  return fallback;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gdim::ParseError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw gdim::ParseError("'" + path + "': " + e.what());
  }
}

// Writes `text` to `path`, or stdout when the path is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw gdim::ParseError("cannot write '" + path + "'");
  out << text;
  if (!out) throw gdim::ParseError("write failed for '" + path + "'");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

gdim::io::InputMode input_mode(const Config& c) {
  if (c.symmetrize && c.rectangular) throw std::invalid_argument("--symmetrize and --rectangular are exclusive");
  if (c.symmetrize) return gdim::io::InputMode::kSymmetrize;
  if (c.rectangular) return gdim::io::InputMode::kRectangular;
  return gdim::io::InputMode::kUndirected;
}

gdim::SparseGraph load_graph(const Config& c) {
  const auto raw = gdim::io::read_matrix(c.input, gdim::io::parse_format(c.format));
  return gdim::io::to_graph(raw, input_mode(c));
}

gdim::CvParams params_from(const Config& c) {
  gdim::CvParams p;
  p.epsilon = c.eps;
  p.k_max = c.kmax;
  p.folds = c.folds;
  p.alpha = c.alpha;
  p.matrix_mode = gdim::parse_matrix_mode(c.matrix);
  p.seed = resolve_seed(c, 0);
  p.bh_correction = c.bh;
  p.rectangular_variance =
      c.as_printed ? gdim::RectangularVariance::kAsPrinted : gdim::RectangularVariance::kSquared;
  return p;
}

void print_summary(std::ostream& out, const gdim::CvReport& r) {
  out << "k_hat " << r.estimate.k_hat << (r.estimate.censored ? " (censored at k_max)" : "") << '\n';
  out << "index\tT\tp" << (r.params.bh_correction ? "\tp_bh" : "") << '\n';
  for (const auto& c : r.components) {
    out << c.index << '\t' << fmt(c.mean_t) << '\t' << fmt(c.p);
    if (r.params.bh_correction) out << '\t' << fmt(c.p_adjusted);
    out << '\n';
  }
}

int cmd_estimate(const Config& c) {
  const gdim::SparseGraph g = load_graph(c);
  const gdim::CvParams p = params_from(c);
  const gdim::CvReport r = c.rectangular ? gdim::eigcv_rectangular(g, p) : gdim::eigcv(g, p);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  if (c.json) {
    emit(c.output, gdim::to_json(r).dump(2) + "\n");
    return kOk;
  }
  if (!c.output.empty()) {
    std::ostringstream csv;
    gdim::write_csv(csv, r);
    emit(c.output, csv.str());
  }
  print_summary(std::cout, r);
  return kOk;
}

int cmd_simulate(const Config& c) {
  const gdim::ModelSpec spec = gdim::parse_model_spec(read_json_file(c.model));
  const gdim::SparseGraph g = gdim::sample(spec.model, resolve_seed(c, spec.seed));
  std::ostringstream out;
  if (gdim::io::parse_format(c.format) == gdim::io::Format::kEdgeList)
    gdim::io::write_edge_list(out, g);
  else
    gdim::io::write_matrix_market(out, g);
  emit(c.output, out.str());
  return kOk;
}

// Population spectrum of E(A) or of its regularized Laplacian.
Eigen::VectorXd population_values(const Eigen::MatrixXd& P, gdim::MatrixMode mode, std::size_t k) {
  Eigen::MatrixXd M = P;
  if (mode == gdim::MatrixMode::kLaplacian) {
    const Eigen::VectorXd d = P.rowwise().sum();
    const double tau = d.mean();
    if (!(tau > 0.0)) throw gdim::NumericError("model has zero expected degree");
    const Eigen::VectorXd s = (d.array() + tau).rsqrt();
    M = s.asDiagonal() * P * s.asDiagonal();
  }
  if (static_cast<std::size_t>(M.rows()) <= gdim::kDenseOracleLimit)
    return gdim::dense_eigen_oracle(M).values.head(static_cast<Eigen::Index>(k));
  gdim::SymmetricOperator op{static_cast<std::size_t>(M.rows()), [&M](std::span<const double> x, std::span<double> y) {
                               Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())) =
                                   M * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
                             }};
  const gdim::SpectralBasis b = gdim::top_eigen(op, k);
  if (!b.converged) throw gdim::ConvergenceError("population eigensolver did not converge");
  return b.values;
}

int cmd_scree(const Config& c) {
  if (c.rectangular) throw std::invalid_argument("scree needs a square graph; use --symmetrize for directed input");
  const gdim::SparseGraph g = load_graph(c);
  gdim::CvParams p = params_from(c);
  p.k_max = std::min(p.k_max, g.rows());
  p.keep_vectors = true;
  const std::size_t k = p.k_max;

  gdim::EigenOptions opts;
  opts.tol = p.eigen_tol;
  opts.seed = gdim::derive_seed(p.seed, gdim::Stream::kStart, 0);
  const gdim::SpectralBasis sample =
      p.matrix_mode == gdim::MatrixMode::kLaplacian ? gdim::top_eigen(gdim::regularized_laplacian(g), k, opts)
                                                    : gdim::top_eigen(g, k, opts);
  if (!sample.converged) throw gdim::ConvergenceError("eigensolver did not converge on the full graph");
  const gdim::CvReport r = gdim::eigcv(g, p);

  // Component 1 is not tested, so its fold statistics come from the kept vectors.
  std::vector<double> lt(k, 0.0);
  std::vector<double> pop(k, 0.0);
  std::optional<gdim::ExpectedAdjacency> P;
  Eigen::VectorXd pop_values;
  if (!c.model.empty()) {
    const gdim::ModelSpec spec = gdim::parse_model_spec(read_json_file(c.model));
    if (spec.model.n != g.rows()) throw std::invalid_argument("model size does not match the graph");
    P = gdim::expected_adjacency(spec.model);
    pop_values = population_values(P->P, p.matrix_mode, k);
  }
  for (std::size_t f = 0; f < p.folds; ++f) {
    const Eigen::MatrixXd& X = r.fold_vectors[f];
    const gdim::SplitPair sp = gdim::split(g, p.epsilon, gdim::fold_seed(p.seed, f));
    for (std::size_t j = 0; j < k; ++j) {
      const std::span<const double> x(X.col(static_cast<Eigen::Index>(j)).data(), g.rows());
      lt[j] += gdim::lambda_test(x, sp.test);
      if (P) pop[j] += gdim::lambda_pop(x, *P);
    }
  }
  std::ostringstream out;
  out << "index,sample_eigenvalue,lambda_test,z";
  if (P) out << ",population_eigenvalue,lambda_pop";
  out << '\n';
  const double nf = static_cast<double>(p.folds);
  for (std::size_t j = 0; j < k; ++j) {
    out << j + 1 << ',' << fmt(sample.values(static_cast<Eigen::Index>(j))) << ',' << fmt(lt[j] / nf) << ',';
    if (j > 0) out << fmt(r.components[j - 1].mean_t);
    if (P) out << ',' << fmt(pop_values(static_cast<Eigen::Index>(j))) << ',' << fmt(pop[j] / nf);
    out << '\n';
  }
  emit(c.output, out.str());
  return kOk;
}

int cmd_study(const Config& c, gdim::StudyKind kind) {
  gdim::StudySpec spec = gdim::parse_study_spec(read_json_file(c.spec));
  spec.seed = resolve_seed(c, spec.seed);
  const gdim::StudyResult r =
      kind == gdim::StudyKind::kCalibration ? gdim::calibration_study(spec) : gdim::accuracy_study(spec);
  if (c.json) {
    emit(c.output, gdim::to_json(r).dump(2) + "\n");
  } else {
    std::ostringstream csv;
    gdim::write_csv(csv, r);
    emit(c.output, csv.str());
  }
  // Wall-clock varies run to run, so it stays out of the main output.
  std::ostringstream timing;
  timing << "degree,edge_law,wall_clock_mean,wall_clock_total\n";
  for (const auto& cell : r.cells)
    timing << fmt(cell.degree) << ',' << gdim::to_string(cell.edge_law) << ',' << fmt(cell.wall_clock_mean) << ','
           << fmt(cell.wall_clock_total) << '\n';
  if (!c.timing.empty()) emit(c.timing, timing.str());
  return kOk;
}

void add_estimator_options(CLI::App* sub, Config& c) {
  sub->add_option("--input", c.input, "Graph file")->required();
  sub->add_option("--format", c.format, "Input format")->check(CLI::IsMember({"edgelist", "matrixmarket"}));
  sub->add_option("--eps", c.eps, "Edge splitting probability");
  sub->add_option("--kmax", c.kmax, "Largest dimension tested");
  sub->add_option("--folds", c.folds, "Number of independent splits");
  sub->add_option("--alpha", c.alpha, "Significance level");
  sub->add_option("--matrix", c.matrix, "Fitting operator")->check(CLI::IsMember({"laplacian", "adjacency"}));
  sub->add_flag("--symmetrize", c.symmetrize, "Treat directed input as undirected (binary OR)");
  sub->add_flag("--bh", c.bh, "Benjamini-Hochberg adjusted p-values");
}

void add_common_options(CLI::App* sub, Config& c) {
  sub->add_option("--seed", c.seed, "Random seed (falls back to GDIM_SEED)");
  sub->add_option("--threads", c.threads, "Worker thread cap")->check(CLI::PositiveNumber);
  sub->add_option("--output", c.output, "Output file (default stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph dimension estimation by cross-validated eigenvalues"};
  app.require_subcommand(1);
  Config c;

  auto* estimate = app.add_subcommand("estimate", "Estimate the dimension of a graph");
  add_estimator_options(estimate, c);
  add_common_options(estimate, c);
  estimate->add_flag("--rectangular", c.rectangular, "Singular-vector mode for directed or rectangular input");
  estimate->add_flag("--as-printed-variance", c.as_printed,
                     "Rectangular mode: use the unsquared right vector in the standard error");
  estimate->add_flag("--json", c.json, "Write the full report as JSON");

  auto* simulate = app.add_subcommand("simulate", "Draw a graph from a model document");
  simulate->add_option("--model", c.model, "Model JSON")->required();
  simulate->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"edgelist", "matrixmarket"}));
  add_common_options(simulate, c);

  auto* scree = app.add_subcommand("scree", "Sample and cross-validated eigenvalues as CSV");
  add_estimator_options(scree, c);
  add_common_options(scree, c);
  scree->add_option("--model", c.model, "Model JSON for population columns");

  auto* calibrate = app.add_subcommand("calibrate", "Null calibration study");
  auto* accuracy = app.add_subcommand("accuracy", "Dimension recovery study");
  for (auto* sub : {calibrate, accuracy}) {
    sub->add_option("--spec", c.spec, "Study JSON")->required();
    add_common_options(sub, c);
    sub->add_flag("--json", c.json, "Write JSON instead of CSV");
    sub->add_option("--timing", c.timing, "Write per-cell wall-clock CSV here");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (c.threads > 0) omp_set_num_threads(c.threads);
  try {
    if (estimate->parsed()) return cmd_estimate(c);
    if (simulate->parsed()) return cmd_simulate(c);
    if (scree->parsed()) return cmd_scree(c);
    if (calibrate->parsed()) return cmd_study(c, gdim::StudyKind::kCalibration);
    return cmd_study(c, gdim::StudyKind::kAccuracy);
  } catch (const gdim::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  } catch (const gdim::NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  }
}
