// Monte-Carlo properties of the estimators. Every run is seeded, so the
// outcomes are fixed; the bounds leave room for a few standard errors.

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include <json.hpp>

#include "gdim/bench.hpp"
#include "gdim/cveig.hpp"
#include "gdim/randgraph.hpp"
#include "gdim/rng.hpp"

using namespace gdim;
using nlohmann::json;

namespace {

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Rank-one Poisson table: row and column margins drawn once, then `total`
// expected counts spread as their outer product.
SparseGraph independence_table(std::size_t rows, std::size_t cols, double total, Seed seed) {
  auto margins = stream_engine(5, Stream::kBlocks, 0);
  std::vector<double> r(rows), c(cols);
  double sr = 0.0, sc = 0.0;
  for (auto& x : r) sr += (x = 0.2 + uniform01(margins));
  for (auto& x : c) sc += (x = 0.2 + uniform01(margins));
  auto eng = stream_engine(seed, Stream::kSample, 0);
  std::vector<Triple> t;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (const auto w = poisson_draw(eng, total * r[i] / sr * c[j] / sc)) t.push_back({i, j, static_cast<double>(w)});
  return from_edge_list(rows, cols, t, Symmetry::kGeneral);
}

Eigen::MatrixXd ten_block_matrix() {
  Eigen::MatrixXd B = Eigen::MatrixXd::Constant(10, 10, 0.08);
  B.diagonal().setConstant(0.28);
  return B;
}

json ten_block_doc(const std::string& theta_law) {
  json B = json::array();
  const Eigen::MatrixXd b = ten_block_matrix();
  for (int i = 0; i < 10; ++i) {
    json row = json::array();
    for (int j = 0; j < 10; ++j) row.push_back(b(i, j));
    B.push_back(row);
  }
  json theta = {{"law", theta_law}};
  if (theta_law == "pareto") theta.update({{"location", 0.5}, {"dispersion", 5.0}});
  return {{"n", 2000}, {"B", B}, {"theta", theta}, {"normalize_theta", true}};
}

}  // namespace

TEST_CASE("two-block graphs at mean degree 35 give k_hat = 2") {
  int hits = 0;
  for (int r = 0; r < 100; ++r) {
    const Seed rs = derive_seed(41, Stream::kReplicate, static_cast<std::uint64_t>(r));
    const GraphModel m = two_block_model(2000, 2.5, 35, EdgeLaw::kPoisson, rs);
    CvParams p;
    p.seed = derive_seed(rs, Stream::kSplit, 0);
    if (eigcv(sample(m, derive_seed(rs, Stream::kSample, 0)), p).estimate.k_hat == 2) ++hits;
  }
  MESSAGE("k_hat = 2 in " << hits << "/100");
  CHECK(hits >= 95);
}

TEST_CASE("modified estimator recovers three strong blocks") {
  Eigen::MatrixXd B = Eigen::MatrixXd::Constant(3, 3, 1.0);
  B.diagonal().setConstant(10.0);
  int hits = 0;
  for (int r = 0; r < 50; ++r) {
    const Seed rs = derive_seed(43, Stream::kReplicate, static_cast<std::uint64_t>(r));
    const GraphModel m = degree_scaled(blockmodel(2000, B, ThetaLaw{}, EdgeLaw::kPoisson, rs), 400);
    const ModifiedReport rep = eigcv_modified(sample(m, derive_seed(rs, Stream::kSample, 0)), 0.5, 5,
                                              derive_seed(rs, Stream::kSplit, 0));
    if (rep.k_hat == 3) ++hits;
  }
  MESSAGE("k_hat = 3 in " << hits << "/50");
  CHECK(hits >= 45);
}

TEST_CASE("singular-vector test on independence tables") {
  // The leading singular pair carries the margins; the second pair is noise.
  int rejected_squared = 0, rejected_printed = 0;
  std::vector<double> t_squared;
  for (int r = 0; r < 500; ++r) {
    const SparseGraph g = independence_table(40, 30, 5000.0, static_cast<Seed>(r));
    CvParams p;
    p.k_max = 3;
    p.folds = 1;
    p.seed = static_cast<Seed>(r);
    const CvReport sq = eigcv_rectangular(g, p);
    p.rectangular_variance = RectangularVariance::kAsPrinted;
    const CvReport pr = eigcv_rectangular(g, p);
    rejected_squared += sq.components[0].p < 0.05;
    rejected_printed += pr.components[0].p < 0.05;
    t_squared.push_back(sq.components[0].mean_t);
  }
  const double rate_sq = rejected_squared / 500.0;
  const double rate_pr = rejected_printed / 500.0;
  double mean = 0.0, ss = 0.0;
  for (double t : t_squared) mean += t / 500.0;
  for (double t : t_squared) ss += (t - mean) * (t - mean);
  const double sd = std::sqrt(ss / 499.0);
  MESSAGE("rejection squared " << rate_sq << ", unsquared " << rate_pr << ", sd(T) " << sd);
  CHECK(rate_sq <= 0.07);
  CHECK(sd == doctest::Approx(1.0).epsilon(0.15));
  // The unsquared variance is miscalibrated on the same draws.
  CHECK(rate_pr > 0.07);
}

TEST_CASE("fit and test quadratic forms: independent under Poisson, negatively related under Bernoulli") {
  auto corr_for = [](EdgeLaw law) {
    std::vector<double> fit, test;
    for (int r = 0; r < 1000; ++r) {
      const GraphModel m = two_block_model(300, 2.5, 200, law, static_cast<Seed>(r));
      CvParams p;
      p.k_max = 3;
      p.folds = 1;
      p.epsilon = 0.3;
      p.seed = static_cast<Seed>(r);
      const CvReport rep = eigcv(sample(m, static_cast<Seed>(r) + 7), p);
      fit.push_back(rep.components[1].folds[0].lambda_fit);
      test.push_back(rep.components[1].folds[0].lambda_test);
    }
    return correlation(fit, test);
  };
  const double poisson = corr_for(EdgeLaw::kPoisson);
  const double bernoulli = corr_for(EdgeLaw::kBernoulli);
  MESSAGE("corr Poisson " << poisson << ", Bernoulli " << bernoulli);
  CHECK(std::abs(poisson) <= 0.1);
  CHECK(bernoulli < -0.1);
}

TEST_CASE("the signal component grows with mean degree") {
  const json doc = {{"model", {{"n", 2000}, {"B", {{2.5, 1.0}, {1.0, 2.5}}}}},
                    {"degrees", {20, 60}},
                    {"edge_laws", {"poisson", "bernoulli"}},
                    {"estimator", {{"k_max", 4}, {"folds", 1}}},
                    {"components", {2}},
                    {"replicates", 50},
                    {"seed", 45}};
  const StudyResult r = calibration_study(parse_study_spec(doc));
  for (const auto& cell : r.cells) {
    const double t2 = cell.components[0].mean_t;
    MESSAGE(to_string(cell.edge_law) << " degree " << cell.degree << ": mean T2 " << t2);
    CHECK(cell.components[0].rejection_rate == 1.0);
    CHECK(t2 > (cell.degree < 30 ? 5.0 : 15.0));
  }
  // Poisson then Bernoulli, each over degrees 20 and 60.
  CHECK(r.cells[1].components[0].mean_t > r.cells[0].components[0].mean_t);
  CHECK(r.cells[3].components[0].mean_t > r.cells[2].components[0].mean_t);
}

TEST_CASE("accuracy study on a dense two-block model") {
  const json doc = {{"model", {{"n", 2000}, {"B", {{2.5, 1.0}, {1.0, 2.5}}}}},
                    {"degrees", {200}},
                    {"replicates", 20},
                    {"seed", 46}};
  const StudyResult r = accuracy_study(parse_study_spec(doc));
  CHECK(r.cells[0].true_k == 2);
  CHECK(r.cells[0].accuracy == 1.0);
  CHECK(r.cells[0].rel_error_mean == 0.0);
}

TEST_CASE("accuracy study separates eigcv from a broken estimator on Pareto degrees") {
  const json doc = {{"model", ten_block_doc("pareto")}, {"degrees", {25, 60}}, {"replicates", 10}, {"seed", 47}};
  const StudySpec spec = parse_study_spec(doc);
  const StudyResult real = accuracy_study(spec);
  const StudyResult stub =
      accuracy_study(spec, [](const SparseGraph&, const CvParams& p) { return p.k_max; });
  for (std::size_t c = 0; c < 2; ++c) {
    MESSAGE("degree " << real.cells[c].degree << ": accuracy " << real.cells[c].accuracy << " vs "
                      << stub.cells[c].accuracy << ", rel error " << real.cells[c].rel_error_mean << " vs "
                      << stub.cells[c].rel_error_mean);
    CHECK(stub.cells[c].accuracy == 0.0);
    CHECK(stub.cells[c].rel_error_mean == doctest::Approx(0.5));
  }
  // At degree 25 most block eigenvalues sit below the detection limit, so
  // eigcv is conservative there: it undershoots while the stub overshoots.
  CHECK(real.cells[0].rel_error_mean < 0.0);
  CHECK(real.cells[0].accuracy <= real.cells[1].accuracy);
  CHECK(real.cells[1].accuracy >= 0.9);
  CHECK(real.cells[1].accuracy > stub.cells[1].accuracy);
}
