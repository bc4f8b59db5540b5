// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <json.hpp>
#include <omp.h>

#include "gdim/bench.hpp"
#include "gdim/cveig.hpp"
#include "gdim/edge_split.hpp"
#include "gdim/randgraph.hpp"
#include "gdim/spectra.hpp"
#include "stats.hpp"
#include "support.hpp"

using namespace gdim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Splits conserve edges exactly and thin each entry binomially.
Outcome conservation() {
  const auto t0 = std::chrono::steady_clock::now();
  const double eps = 0.05;
  Eigen::MatrixXd B(2, 2);
  B << 2.5, 1.0, 1.0, 2.5;
  const GraphModel m = degree_scaled(blockmodel(200, B, ThetaLaw{}, EdgeLaw::kPoisson, 1), 100);
  const SparseGraph g = sample(m, 2);
  const Eigen::MatrixXd G = to_dense(g);
  std::vector<Triple> upper;
  for (const Triple& t : g.triples())
    if (t.col >= t.row) upper.push_back(t);

  std::size_t exact = 0;
  std::map<int, std::vector<double>> counts;
  for (const Triple& t : upper) counts[static_cast<int>(t.weight)].assign(static_cast<std::size_t>(t.weight) + 1, 0.0);
  for (Seed s = 0; s < 1000; ++s) {
    const SplitPair sp = split(g, eps, s);
    if ((to_dense(sp.fit) + to_dense(sp.test) - G).cwiseAbs().maxCoeff() == 0.0) ++exact;
    for (const Triple& t : upper)
      counts[static_cast<int>(t.weight)][static_cast<std::size_t>(sp.test.at(t.row, t.col))] += 1.0;
  }
  double worst = 1.0;
  for (auto& [w, obs] : counts) {
    double total = 0.0;
    for (double o : obs) total += o;
    const boost::math::binomial_distribution<double> bin(w, eps);
    std::vector<double> expected(obs.size());
    for (std::size_t k = 0; k < obs.size(); ++k) expected[k] = total * boost::math::pdf(bin, static_cast<double>(k));
    const auto gof = test::chi_square_gof(obs, expected);
    if (gof.dof > 0) worst = std::min(worst, gof.p_value);
  }
  const double secs = since(t0);
  return {exact == 1000 && worst > 1e-3 && secs < 10.0,
          fmt("%zu/1000 exact, weights 1..%d, min GoF p %.3g, %.1f s", exact, counts.rbegin()->first, worst, secs)};
}

// 2. Scaling a population matrix scales its spectrum and keeps its eigenspaces.
Outcome spectral_invariance() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_value = 0.0;
  double worst_angle = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto n = static_cast<Eigen::Index>(20 + 4 * i);
    const Eigen::Index k = 1 + i % 6;
    auto eng = stream_engine(77, Stream::kBlocks, static_cast<std::uint64_t>(i));
    Eigen::MatrixXd X(n, k);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < k; ++c) X(r, c) = uniform01(eng);
    const Eigen::MatrixXd P = X * X.transpose();
    const double eps = 0.01 + 0.9 * uniform01(eng);
    const SpectralBasis full = dense_eigen_oracle(P);
    const SpectralBasis scaled = dense_eigen_oracle(eps * P);
    worst_value = std::max(worst_value, (scaled.values - eps * full.values).cwiseAbs().maxCoeff());
    worst_angle = std::max(worst_angle, max_principal_angle_sin(full.vectors.leftCols(k), scaled.vectors.leftCols(k)));
  }
  const double secs = since(t0);
  return {worst_value <= 1e-10 && worst_angle < 1e-8 && secs < 5.0,
          fmt("max value error %.2e, max sin angle %.2e, %.2f s", worst_value, worst_angle, secs)};
}

// 3. diag(X^T P X) is the best diagonal reconstruction.
Outcome diagonal_optimality() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = -1e300;
  for (int i = 0; i < 20; ++i) {
    const auto n = static_cast<Eigen::Index>(10 + 2 * i);
    const Eigen::Index q = 1 + i % 5;
    auto eng = stream_engine(78, Stream::kBlocks, static_cast<std::uint64_t>(i));
    Eigen::MatrixXd Z(n, 3);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < 3; ++c) Z(r, c) = uniform01(eng);
    const ExpectedAdjacency P{Z * Z.transpose()};
    const Eigen::MatrixXd X = test::random_orthonormal(static_cast<std::size_t>(n), static_cast<std::size_t>(q),
                                                       static_cast<Seed>(100 + i));
    auto objective = [&](const Eigen::VectorXd& g) {
      return (P.P - X * g.asDiagonal() * X.transpose()).squaredNorm();
    };
    // Plain gradient descent on the Frobenius objective from a random start.
    Eigen::VectorXd g(q);
    for (Eigen::Index j = 0; j < q; ++j) g(j) = 10.0 * uniform01(eng);
    for (int it = 0; it < 10'000; ++it) {
      const Eigen::MatrixXd R = P.P - X * g.asDiagonal() * X.transpose();
      const Eigen::VectorXd grad = -2.0 * (X.transpose() * R * X).diagonal();
      g -= 0.1 * grad;
    }
    const Eigen::VectorXd closed = optimal_diag_reconstruction(P, X);
    worst = std::max(worst, objective(closed) - objective(g));
  }
  const double secs = since(t0);
  return {worst <= 1e-8 && secs < 30.0, fmt("max f(closed) - f(numeric) = %.2e, %.2f s", worst, secs)};
}

json two_block_study(std::vector<double> degrees, const std::string& law, std::size_t replicates, Seed seed) {
  return {{"model", {{"n", 2000}, {"B", {{2.5, 1.0}, {1.0, 2.5}}}}},
          {"degrees", degrees},
          {"edge_laws", {law}},
          {"estimator", {{"epsilon", 0.05}, {"k_max", 4}, {"folds", 1}}},
          {"components", {3, 4}},
          {"replicates", replicates},
          {"seed", seed}};
}

// 4. T_3 is calibrated under a rank-two Poisson model.
Outcome clt_calibration() {
  const auto t0 = std::chrono::steady_clock::now();
  const StudyResult r = calibration_study(parse_study_spec(two_block_study({60}, "poisson", 500, 4)));
  const ComponentSummary& t3 = r.cells[0].components[0];
  const double secs = since(t0);
  const bool pass = t3.rejection_rate <= 0.07 && std::abs(t3.mean_t) <= 0.15 && t3.sd_t >= 0.75 && t3.sd_t <= 1.15 &&
                    secs < 600.0;
  return {pass, fmt("T3 rejection %.3f, mean %.3f, sd %.3f, %.0f s", t3.rejection_rate, t3.mean_t, t3.sd_t, secs)};
}

// 5. Bernoulli edges make the test conservative.
Outcome bernoulli_conservative() {
  const auto t0 = std::chrono::steady_clock::now();
  const StudyResult bern = calibration_study(parse_study_spec(two_block_study({20, 60, 100}, "bernoulli", 300, 5)));
  const StudyResult pois = calibration_study(parse_study_spec(two_block_study({100}, "poisson", 300, 5)));
  bool pass = true;
  std::string detail;
  for (const auto& cell : bern.cells) {
    const auto& t3 = cell.components[0];
    const auto& t4 = cell.components[1];
    pass = pass && t3.rejection_rate <= 0.07 && t4.rejection_rate <= 0.07;
    detail += fmt("d%.0f T3 %.3f T4 %.3f; ", cell.degree, t3.rejection_rate, t4.rejection_rate);
  }
  const double mb = bern.cells[2].components[0].mean_t;
  const double mp = pois.cells[0].components[0].mean_t;
  const double secs = since(t0);
  pass = pass && mb < mp && secs < 900.0;
  return {pass, detail + fmt("mean T3 at d100 Bernoulli %.3f < Poisson %.3f, %.0f s", mb, mp, secs)};
}

// 6. Ten-block degree-corrected model is recovered at mean degree 60.
Outcome accuracy_ten_blocks() {
  const auto t0 = std::chrono::steady_clock::now();
  json B = json::array();
  for (int i = 0; i < 10; ++i) {
    json row = json::array();
    for (int j = 0; j < 10; ++j) row.push_back(i == j ? 0.28 : 0.08);
    B.push_back(row);
  }
  const json doc = {{"model", {{"n", 2000}, {"B", B}, {"theta", {{"law", "point"}}}}},
                    {"degrees", {60}},
                    {"edge_laws", {"bernoulli"}},
                    {"estimator", {{"epsilon", 0.05}, {"folds", 10}, {"alpha", 0.05}}},
                    {"replicates", 20},
                    {"true_k", 10},
                    {"seed", 6},
                    {"raw_dump", true}};
  const StudyResult r = accuracy_study(parse_study_spec(doc));
  const auto& cell = r.cells[0];
  std::size_t hits = 0;
  for (double k : cell.raw) hits += k == 10.0;
  const double secs = since(t0);
  return {hits >= 18 && secs < 300.0, fmt("k_hat = 10 in %zu/20, %.0f s", hits, secs)};
}

// 7. One estimate on an email-network-sized directed graph.
Outcome runtime() {
  const std::size_t n = 1000;
  Eigen::MatrixXd B = Eigen::MatrixXd::Constant(28, 28, 0.1);
  B.diagonal().setConstant(2.0);
  ThetaLaw theta;
  theta.kind = ThetaLaw::Kind::kExponential;
  // About 12.5 arcs per node; merging reciprocal pairs leaves undirected degree near 23.
  const GraphModel m = degree_scaled(blockmodel(n, B, theta, EdgeLaw::kPoisson, 7), 14.5);
  const ExpectedAdjacency P = expected_adjacency(m);
  // Each ordered pair gets an arc when its Poisson count is positive.
  auto eng = stream_engine(7, Stream::kSample, 0);
  std::vector<Triple> arcs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && uniform01(eng) < -std::expm1(-P.P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))))
        arcs.push_back({i, j, 1.0});
  const SparseGraph directed = from_edge_list(n, n, arcs, Symmetry::kGeneral);
  const SparseGraph g = symmetrize(directed);
  const double mean_degree = degrees(g).sum() / static_cast<double>(n);

  const auto t0 = std::chrono::steady_clock::now();
  CvParams p;
  p.k_max = 50;
  p.folds = 25;
  const CvReport rep = eigcv(g, p);
  const double secs = since(t0);
  return {secs < 30.0 && mean_degree > 18.0 && mean_degree < 28.0,
          fmt("n %zu, %zu arcs, undirected mean degree %.1f, k_hat %zu, %.2f s", n, arcs.size(), mean_degree,
              rep.estimate.k_hat, secs)};
}

// 8. Lanczos eigenpairs and singular triplets match the dense decompositions.
Outcome eigensolver_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_value = 0.0;
  double worst_residual = 0.0;
  std::size_t unconverged = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t m = 3 + static_cast<std::size_t>(i % 6);
    if (i % 2 == 0) {
      const std::size_t n = 20 + static_cast<std::size_t>(i) * 18 / 5;
      const SparseGraph g = test::random_symmetric(n, 0.08, static_cast<Seed>(500 + i));
      const Eigen::MatrixXd A = to_dense(g);
      const SpectralBasis dense = dense_eigen_oracle(A);
      const SpectralBasis sparse = top_eigen(g, m);
      unconverged += !sparse.converged;
      for (std::size_t j = 0; j < m; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double scale = std::max(1.0, std::abs(dense.values(jj)));
        worst_value = std::max(worst_value, std::abs(sparse.values(jj) - dense.values(jj)) / scale);
        worst_residual = std::max(
            worst_residual, (A * sparse.vectors.col(jj) - sparse.values(jj) * sparse.vectors.col(jj)).norm() / scale);
      }
    } else {
      const std::size_t rows = 30 + static_cast<std::size_t>(i) * 17 / 5;
      const std::size_t cols = 200 - static_cast<std::size_t>(i) * 3;
      const SparseGraph g = test::random_general(rows, cols, 0.08, static_cast<Seed>(600 + i));
      const Eigen::MatrixXd A = to_dense(g);
      const SpectralBasis dense = dense_svd_oracle(A);
      const SpectralBasis sparse = top_svd(g, m);
      unconverged += !sparse.converged;
      for (std::size_t j = 0; j < m; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double s = sparse.values(jj);
        const double scale = std::max(1.0, dense.values(jj));
        worst_value = std::max(worst_value, std::abs(s - dense.values(jj)) / scale);
        worst_residual = std::max(
            {worst_residual, (A * sparse.vectors.col(jj) - s * sparse.left_vectors.col(jj)).norm() / scale,
             (A.transpose() * sparse.left_vectors.col(jj) - s * sparse.vectors.col(jj)).norm() / scale});
      }
    }
  }
  const double secs = since(t0);
  return {unconverged == 0 && worst_value <= 1e-8 && worst_residual <= 1e-8 && secs < 30.0,
          fmt("max relative value error %.2e, max residual %.2e, %.2f s", worst_value, worst_residual, secs)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// 9. Every subcommand is byte-reproducible across runs and thread counts.
Outcome determinism() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = fs::temp_directory_path() / fmt("gdim_acceptance_%d", static_cast<int>(std::time(nullptr)));
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const json& doc) {
    std::ofstream(dir / name) << doc.dump();
    return (dir / name).string();
  };
  const std::string model = write("model.json", {{"n", 600}, {"B", {{2.5, 1.0}, {1.0, 2.5}}}, {"mean_degree", 30}});
  const json study = {{"model", {{"n", 300}, {"B", {{2.5, 1.0}, {1.0, 2.5}}}}},
                      {"degrees", {20, 30}},
                      {"edge_laws", {"poisson", "bernoulli"}},
                      {"estimator", {{"k_max", 4}, {"folds", 2}}},
                      {"replicates", 4},
                      {"seed", 3}};
  const std::string cal = write("cal.json", study);
  json acc_doc = study;
  acc_doc["true_k"] = 2;
  const std::string acc = write("acc.json", acc_doc);
  const std::string graph = (dir / "graph.txt").string();
  const std::string cli = GDIM_CLI_PATH;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "simulate --model " + model + " --seed 9"},
      {"simulate-mm", "simulate --model " + model + " --seed 9 --format matrixmarket"},
      {"estimate", "estimate --input " + graph + " --seed 2 --json"},
      {"estimate-rect", "estimate --input " + graph + " --seed 2 --json --rectangular --kmax 6"},
      {"estimate-csv", "estimate --input " + graph + " --seed 2 --bh"},
      {"scree", "scree --input " + graph + " --seed 2 --model " + model},
      {"calibrate", "calibrate --spec " + cal + " --json"},
      {"accuracy", "accuracy --spec " + acc + " --json"},
  };
  if (std::system((cli + " simulate --model " + model + " --seed 9 --output " + graph).c_str()) != 0)
    return {false, "could not simulate an input graph"};

  std::size_t identical = 0;
  std::string failures;
  for (const auto& [name, args] : commands) {
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "1", "4"}) {
      const fs::path out = dir / (name + "_" + threads + "_" + std::to_string(outputs.size()));
      const std::string cmd = cli + " " + args + " --threads " + threads + " --output " + out.string() + " >/dev/null";
      if (std::system(cmd.c_str()) != 0) {
        failures += name + "(exit) ";
        break;
      }
      outputs.push_back(slurp(out));
    }
    if (outputs.size() == 3 && !outputs[0].empty() && outputs[0] == outputs[1] && outputs[0] == outputs[2])
      ++identical;
    else if (outputs.size() == 3)
      failures += name + " ";
  }
  fs::remove_all(dir);
  const double secs = since(t0);
  return {identical == commands.size(),
          fmt("%zu/%zu commands identical over two runs and threads {1,4}%s%s, %.1f s", identical, commands.size(),
              failures.empty() ? "" : "; differing: ", failures.c_str(), secs)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"conservation and thinning", conservation},
      {"spectral invariance under scaling", spectral_invariance},
      {"optimal diagonal reconstruction", diagonal_optimality},
      {"null calibration of T3", clt_calibration},
      {"Bernoulli conservativeness", bernoulli_conservative},
      {"ten-block accuracy", accuracy_ten_blocks},
      {"runtime on an email-sized graph", runtime},
      {"eigensolver oracle agreement", eigensolver_oracles},
      {"CLI determinism", determinism},
  };
  // Optional argument: run a single criterion by number.
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
