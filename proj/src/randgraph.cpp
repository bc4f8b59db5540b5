#include "gdim/randgraph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "gdim/error.hpp"

namespace gdim {

namespace {

using Index = Eigen::Index;

std::vector<double> block_theta_sums(const GraphModel& m, std::size_t blocks) {
  std::vector<double> s(blocks, 0.0);
  for (std::size_t i = 0; i < m.n; ++i) s[m.block_of[i]] += m.theta[i];
  return s;
}

struct RowDraws {
  std::vector<std::size_t> cols;
  std::vector<double> weights;
};

void sample_row(const GraphModel& m, Seed seed, std::size_t i, RowDraws& out) {
  auto eng = stream_engine(seed, Stream::kSample, i);
  for (std::size_t j = i; j < m.n; ++j) {
    const double rate = m.rate(i, j);
    std::uint64_t w = 0;
    if (m.edge_law == EdgeLaw::kPoisson)
      w = poisson_draw(eng, rate);
    else
      w = uniform01(eng) < rate ? 1 : 0;
    if (w > 0) {
      out.cols.push_back(j);
      out.weights.push_back(static_cast<double>(w));
    }
  }
}

}  // namespace

std::size_t GraphModel::k() const {
  std::vector<std::size_t> seen(block_of);
  std::sort(seen.begin(), seen.end());
  return static_cast<std::size_t>(std::unique(seen.begin(), seen.end()) - seen.begin());
}

double GraphModel::expected_mean_degree() const {
  if (n == 0) return 0.0;
  const auto s = block_theta_sums(*this, static_cast<std::size_t>(B.rows()));
  double total = 0.0;
  for (Index a = 0; a < B.rows(); ++a)
    for (Index b = 0; b < B.cols(); ++b) total += s[static_cast<std::size_t>(a)] * s[static_cast<std::size_t>(b)] * B(a, b);
  return total / static_cast<double>(n);
}

double GraphModel::max_rate() const {
  std::vector<double> top(static_cast<std::size_t>(B.rows()), 0.0);
  for (std::size_t i = 0; i < n; ++i) top[block_of[i]] = std::max(top[block_of[i]], theta[i]);
  double best = 0.0;
  for (Index a = 0; a < B.rows(); ++a)
    for (Index b = 0; b < B.cols(); ++b)
      best = std::max(best, top[static_cast<std::size_t>(a)] * top[static_cast<std::size_t>(b)] * B(a, b));
  return best;
}

void GraphModel::validate() const {
  if (B.rows() != B.cols()) throw std::invalid_argument("model: B must be square");
  if (block_of.size() != n || theta.size() != n) throw std::invalid_argument("model: block_of/theta length must be n");
  for (Index a = 0; a < B.rows(); ++a)
    for (Index b = 0; b < B.cols(); ++b) {
      if (!(B(a, b) >= 0.0) || !std::isfinite(B(a, b))) throw std::invalid_argument("model: B entries must be finite and >= 0");
      if (B(a, b) != B(b, a)) throw std::invalid_argument("model: B must be symmetric");
    }
  for (std::size_t z : block_of)
    if (z >= static_cast<std::size_t>(B.rows())) throw std::invalid_argument("model: block index out of range");
  for (double t : theta)
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("model: theta must be finite and >= 0");
  if (edge_law == EdgeLaw::kBernoulli && max_rate() > 1.0)
    throw NumericError("model: Bernoulli edge probability exceeds 1 (max rate " + std::to_string(max_rate()) + ")");
}

GraphModel make_model(Eigen::MatrixXd B, std::vector<std::size_t> block_of, std::vector<double> theta, EdgeLaw law) {
  GraphModel m;
  m.n = block_of.size();
  m.B = std::move(B);
  m.block_of = std::move(block_of);
  m.theta = std::move(theta);
  m.edge_law = law;
  m.validate();
  return m;
}

std::vector<std::size_t> uniform_blocks(std::size_t n, std::size_t k, Seed seed) {
  if (k == 0) throw std::invalid_argument("uniform_blocks: k must be positive");
  auto eng = stream_engine(seed, Stream::kBlocks, 0);
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  std::vector<std::size_t> z(n);
  for (auto& b : z) b = pick(eng);
  return z;
}

std::vector<double> draw_theta(std::size_t n, const ThetaLaw& law, Seed seed) {
  auto eng = stream_engine(seed, Stream::kTheta, 0);
  std::vector<double> theta(n);
  for (auto& t : theta) {
    switch (law.kind) {
      case ThetaLaw::Kind::kPoint:
        t = law.value;
        break;
      case ThetaLaw::Kind::kExponential:
        if (!(law.rate > 0.0)) throw std::invalid_argument("theta: exponential rate must be positive");
        t = -std::log1p(-uniform01(eng)) / law.rate;
        break;
      case ThetaLaw::Kind::kPareto:
        if (!(law.location > 0.0) || !(law.dispersion > 0.0))
          throw std::invalid_argument("theta: Pareto location and dispersion must be positive");
        t = law.location * std::pow(1.0 - uniform01(eng), -1.0 / law.dispersion);
        break;
    }
  }
  if (law.unit_sum) {
    const double s = std::accumulate(theta.begin(), theta.end(), 0.0);
    if (!(s > 0.0)) throw NumericError("theta: cannot normalize a zero vector");
    for (auto& t : theta) t /= s;
  }
  return theta;
}

GraphModel blockmodel(std::size_t n, const Eigen::MatrixXd& B, const ThetaLaw& theta, EdgeLaw law, Seed seed) {
  return make_model(B, uniform_blocks(n, static_cast<std::size_t>(B.rows()), seed), draw_theta(n, theta, seed), law);
}

GraphModel two_block_model(std::size_t n, double ratio, double mean_degree, EdgeLaw law, Seed seed) {
  Eigen::Matrix2d B;
  B << ratio, 1.0, 1.0, ratio;
  // Scale on a Poisson model first so an infeasible Bernoulli target is caught
  // by degree_scaled rather than by the unscaled B.
  GraphModel m = blockmodel(n, B, ThetaLaw{}, EdgeLaw::kPoisson, seed);
  m = degree_scaled(m, mean_degree);
  m.edge_law = law;
  m.validate();
  return m;
}

SparseGraph sample(const GraphModel& model, Seed seed, Execution exec) {
  model.validate();
  const std::size_t n = model.n;
  std::vector<RowDraws> upper(n);
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
      sample_row(model, seed, static_cast<std::size_t>(i), upper[static_cast<std::size_t>(i)]);
  } else {
    for (std::size_t i = 0; i < n; ++i) sample_row(model, seed, i, upper[i]);
  }

  // Mirror the upper triangle. Visiting rows in order places each lower entry
  // before the row's own upper entries, so columns stay sorted.
  std::vector<std::size_t> row_ptr(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : upper[i].cols) {
      ++row_ptr[i + 1];
      if (j != i) ++row_ptr[j + 1];
    }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  std::vector<std::size_t> cursor(row_ptr.begin(), row_ptr.end() - 1);
  std::vector<std::size_t> col_idx(row_ptr.back());
  std::vector<double> values(row_ptr.back());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < upper[i].cols.size(); ++p) {
      const std::size_t j = upper[i].cols[p];
      const double w = upper[i].weights[p];
      col_idx[cursor[i]] = j;
      values[cursor[i]++] = w;
      if (j != i) {
        col_idx[cursor[j]] = i;
        values[cursor[j]++] = w;
      }
    }
  }
  return SparseGraph::from_csr(n, n, std::move(row_ptr), std::move(col_idx), std::move(values), Symmetry::kSymmetric);
}

ExpectedAdjacency expected_adjacency(const GraphModel& model) {
  model.validate();
  if (model.n > kDenseModelLimit)
    throw std::invalid_argument("expected_adjacency: n exceeds the dense limit of " + std::to_string(kDenseModelLimit));
  const auto n = static_cast<Index>(model.n);
  ExpectedAdjacency out{Eigen::MatrixXd(n, n)};
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out.P(i, j) = model.rate(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return out;
}

GraphModel hierarchical_model(int depth, double p, std::size_t n, const ThetaLaw& theta, Seed seed, EdgeLaw law) {
  if (depth < 1 || depth > 20) throw std::invalid_argument("hierarchical_model: depth must be in [1, 20]");
  if (!(p > 0.0)) throw std::invalid_argument("hierarchical_model: p must be positive");
  const std::size_t k = std::size_t{1} << depth;
  Eigen::MatrixXd B(static_cast<Index>(k), static_cast<Index>(k));
  for (std::size_t u = 0; u < k; ++u)
    for (std::size_t v = 0; v < k; ++v) {
      // Leaves share their top `g` path bits with their common ancestor.
      const int g = depth - static_cast<int>(std::bit_width(u ^ v));
      B(static_cast<Index>(u), static_cast<Index>(v)) = p * std::ldexp(1.0, g);
    }
  return blockmodel(n, B, theta, law, seed);
}

GraphModel degree_scaled(const GraphModel& model, double target_mean_degree) {
  if (!(target_mean_degree > 0.0)) throw std::invalid_argument("degree_scaled: target must be positive");
  const double current = model.expected_mean_degree();
  if (!(current > 0.0)) throw NumericError("degree_scaled: model has zero expected degree");
  GraphModel out = model;
  out.B *= target_mean_degree / current;
  if (out.edge_law == EdgeLaw::kBernoulli && out.max_rate() > 1.0)
    throw NumericError("degree_scaled: mean degree " + std::to_string(target_mean_degree) +
                       " is infeasible under Bernoulli edges (max probability " + std::to_string(out.max_rate()) + ")");
  return out;
}

EdgeLaw parse_edge_law(const std::string& name) {
  if (name == "poisson") return EdgeLaw::kPoisson;
  if (name == "bernoulli") return EdgeLaw::kBernoulli;
  throw ParseError("unknown edge law '" + name + "'");
}

std::string to_string(EdgeLaw law) { return law == EdgeLaw::kPoisson ? "poisson" : "bernoulli"; }

ModelSpec parse_model_spec(const nlohmann::json& doc) {
  try {
    ModelSpec spec;
    spec.seed = doc.value("seed", Seed{0});
    const auto n = doc.at("n").get<std::size_t>();
    const EdgeLaw law = parse_edge_law(doc.value("edge_law", std::string("poisson")));

    ThetaLaw theta_law;
    std::vector<double> theta;
    if (doc.contains("theta") && doc["theta"].is_array()) {
      theta = doc["theta"].get<std::vector<double>>();
      if (theta.size() != n) throw ParseError("model: theta vector must have length n");
    } else if (doc.contains("theta")) {
      const auto& t = doc["theta"];
      const auto kind = t.value("law", std::string("point"));
      if (kind == "point") {
        theta_law.kind = ThetaLaw::Kind::kPoint;
        theta_law.value = t.value("value", 1.0);
      } else if (kind == "exponential") {
        theta_law.kind = ThetaLaw::Kind::kExponential;
        theta_law.rate = t.value("rate", 1.0);
      } else if (kind == "pareto") {
        theta_law.kind = ThetaLaw::Kind::kPareto;
        theta_law.location = t.value("location", 0.5);
        theta_law.dispersion = t.value("dispersion", 5.0);
      } else {
        throw ParseError("model: unknown theta law '" + kind + "'");
      }
    }
    theta_law.unit_sum = doc.value("normalize_theta", false);
    if (theta.empty()) theta = draw_theta(n, theta_law, spec.seed);

    Eigen::MatrixXd B;
    if (doc.contains("hierarchical")) {
      const auto& h = doc["hierarchical"];
      // Built through hierarchical_model so B and the assignment share its definition.
      GraphModel hm = hierarchical_model(h.at("depth").get<int>(), h.at("p").get<double>(), n, theta_law, spec.seed);
      B = hm.B;
    } else {
      const auto rows = doc.at("B").get<std::vector<std::vector<double>>>();
      B.resize(static_cast<Index>(rows.size()), static_cast<Index>(rows.size()));
      for (std::size_t a = 0; a < rows.size(); ++a) {
        if (rows[a].size() != rows.size()) throw ParseError("model: B must be square");
        for (std::size_t b = 0; b < rows.size(); ++b) B(static_cast<Index>(a), static_cast<Index>(b)) = rows[a][b];
      }
    }
    if (doc.contains("k") && doc["k"].get<std::size_t>() != static_cast<std::size_t>(B.rows()))
      throw ParseError("model: k does not match the size of B");

    std::vector<std::size_t> blocks;
    if (doc.contains("blocks"))
      blocks = doc["blocks"].get<std::vector<std::size_t>>();
    else
      blocks = uniform_blocks(n, static_cast<std::size_t>(B.rows()), spec.seed);
    if (blocks.size() != n) throw ParseError("model: blocks vector must have length n");

    // Scale under Poisson so infeasible Bernoulli targets report the target.
    GraphModel m = make_model(std::move(B), std::move(blocks), std::move(theta), EdgeLaw::kPoisson);
    if (doc.contains("mean_degree")) m = degree_scaled(m, doc["mean_degree"].get<double>());
    m.edge_law = law;
    if (law == EdgeLaw::kBernoulli && m.max_rate() > 1.0)
      throw NumericError("model: Bernoulli edge probability exceeds 1 (max rate " + std::to_string(m.max_rate()) + ")");
    m.validate();
    spec.model = std::move(m);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
}

}  // namespace gdim
