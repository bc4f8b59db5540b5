#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gdim/graph.hpp"
#include "gdim/rng.hpp"

namespace gdim {

enum class EdgeLaw { kPoisson, kBernoulli };

/// Execution policy for the row-parallel generators. Both policies produce
/// identical output for a given seed; kSerial is the reference path.
enum class Execution { kSerial, kParallel };

/// Distribution of the degree parameters theta_i.
struct ThetaLaw {
  enum class Kind { kPoint, kExponential, kPareto };
  Kind kind = Kind::kPoint;
  double value = 1.0;       // point mass location
  double rate = 1.0;        // exponential rate
  double location = 0.5;    // Pareto scale (minimum value)
  double dispersion = 5.0;  // Pareto shape
  /// Rescale the drawn vector so that it sums to one.
  bool unit_sum = false;
};

/// Degree-corrected blockmodel: P_ij = theta_i theta_j B_{z(i) z(j)}.
struct GraphModel {
  std::size_t n = 0;
  std::vector<std::size_t> block_of;
  Eigen::MatrixXd B;
  std::vector<double> theta;
  EdgeLaw edge_law = EdgeLaw::kPoisson;

  /// Number of distinct blocks referenced by `block_of`.
  std::size_t k() const;
  double rate(std::size_t i, std::size_t j) const {
    return theta[i] * theta[j] * B(static_cast<Eigen::Index>(block_of[i]), static_cast<Eigen::Index>(block_of[j]));
  }
  /// (1/n) Σ_ij P_ij, diagonal included.
  double expected_mean_degree() const;
  double max_rate() const;
  /// Throws std::invalid_argument / NumericError when an invariant fails.
  void validate() const;
};

struct ExpectedAdjacency {
  Eigen::MatrixXd P;
};

inline constexpr std::size_t kDenseModelLimit = 10'000;

GraphModel make_model(Eigen::MatrixXd B, std::vector<std::size_t> block_of, std::vector<double> theta, EdgeLaw law);

/// Uniform multinomial block assignment.
std::vector<std::size_t> uniform_blocks(std::size_t n, std::size_t k, Seed seed);

std::vector<double> draw_theta(std::size_t n, const ThetaLaw& law, Seed seed);

/// Plain or degree-corrected SBM with uniformly assigned blocks.
GraphModel blockmodel(std::size_t n, const Eigen::MatrixXd& B, const ThetaLaw& theta, EdgeLaw law, Seed seed);

/// Two equal-probability blocks with within/between rate ratio `ratio`,
/// scaled to the requested expected mean degree.
GraphModel two_block_model(std::size_t n, double ratio, double mean_degree, EdgeLaw law, Seed seed);

/// Symmetric integer-weighted draw. Each upper-triangle entry (diagonal
/// included) comes from the row-keyed stream (seed, row), so the result does
/// not depend on the thread count.
SparseGraph sample(const GraphModel& model, Seed seed, Execution exec = Execution::kParallel);

ExpectedAdjacency expected_adjacency(const GraphModel& model);

/// 2^depth leaf blocks with B_uv = p * 2^{g(u,v)}, g the depth of the most
/// recent common ancestor of leaves u and v in a complete binary tree.
GraphModel hierarchical_model(int depth, double p, std::size_t n, const ThetaLaw& theta, Seed seed,
                              EdgeLaw law = EdgeLaw::kPoisson);

/// Rescales B so the expected mean degree equals `target_mean_degree`.
GraphModel degree_scaled(const GraphModel& model, double target_mean_degree);

struct ModelSpec {
  GraphModel model;
  Seed seed = 0;
};

/// Model document: {n, B | hierarchical: {depth, p}, k?, blocks?, theta, normalize_theta?,
/// edge_law, mean_degree?, seed}. Throws ParseError on malformed documents.
ModelSpec parse_model_spec(const nlohmann::json& doc);

EdgeLaw parse_edge_law(const std::string& name);
std::string to_string(EdgeLaw law);

}  // namespace gdim
