#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gdim/cveig.hpp"
#include "gdim/graph.hpp"
#include "gdim/randgraph.hpp"
#include "gdim/rng.hpp"

namespace gdim {

/// A Monte-Carlo grid over expected mean degree and edge law. `model` is a
/// model document (see parse_model_spec); each replicate overrides its seed,
/// mean degree and edge law before drawing.
struct StudySpec {
  nlohmann::json model;
  std::vector<double> degrees;
  std::vector<EdgeLaw> edge_laws{EdgeLaw::kPoisson};
  CvParams estimator;
  std::size_t replicates = 20;
  Seed seed = 0;
  /// Rejection threshold for the calibration statistics.
  double threshold = 1.65;
  /// Components whose statistics a calibration study reports.
  std::vector<std::size_t> components{2, 3, 4};
  /// Target dimension for accuracy studies; defaults to the numerical rank of B.
  std::optional<std::size_t> true_k;
  /// Keep every replicate's raw values in the result.
  bool raw_dump = false;

  /// Throws std::invalid_argument when an invariant fails.
  void validate() const;
};

/// Reads a study document; unknown estimator fields take the library defaults.
/// Throws ParseError on malformed documents.
StudySpec parse_study_spec(const nlohmann::json& doc);

struct ComponentSummary {
  std::size_t index = 0;
  double rejection_rate = 0.0;
  double mean_t = 0.0;
  double sd_t = 0.0;
  /// NaN when sd_t is zero (for example a single replicate).
  double alpha_hat = 0.0;
};

struct StudyCell {
  double degree = 0.0;
  EdgeLaw edge_law = EdgeLaw::kPoisson;
  std::size_t replicates = 0;
  std::vector<ComponentSummary> components;  // calibration only
  std::size_t true_k = 0;                    // accuracy only
  double accuracy = 0.0;
  double rel_error_mean = 0.0;
  double rel_error_sd = 0.0;
  double wall_clock_mean = 0.0;  // seconds per replicate
  double wall_clock_total = 0.0;
  /// Per-replicate raw values when requested: k_hat (accuracy) or T per
  /// reported component (calibration, replicate-major).
  std::vector<double> raw;
};

enum class StudyKind { kCalibration, kAccuracy };

struct StudyResult {
  StudyKind kind = StudyKind::kCalibration;
  std::vector<StudyCell> cells;
};

/// Dimension estimator plugged into accuracy_study.
using Estimator = std::function<std::size_t(const SparseGraph&, const CvParams&)>;

/// k_hat from eigcv.
std::size_t eigcv_estimator(const SparseGraph& a, const CvParams& params);

/// Null-calibration grid on a two-block model: T for the requested
/// components, rejection frequency at the threshold, mean, sd and α̂.
StudyResult calibration_study(const StudySpec& spec);

/// Fraction of replicates recovering the true dimension, relative error and
/// wall-clock per cell.
StudyResult accuracy_study(const StudySpec& spec, const Estimator& estimator = eigcv_estimator);

/// 1 - Φ((threshold - mean_t) / sd_t). Requires sd_t > 0.
double alpha_hat(double mean_t, double sd_t, double threshold = 1.65);

/// Long format, one row per cell per statistic. Wall-clock columns are
/// written only with `include_timing`, so the default output is reproducible.
void write_csv(std::ostream& out, const StudyResult& result, bool include_timing = false);
nlohmann::json to_json(const StudyResult& result, bool include_timing = false);

}  // namespace gdim
