#include "gdim/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "gdim/error.hpp"

namespace gdim {

namespace {

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

// Sample mean and (n - 1)-denominator standard deviation; sd is 0 for n < 2.
Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() < 2) return m;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return m;
}

template <class Body>
void for_each_replicate(std::size_t count, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
  const auto nr = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic)
  for (long r = 0; r < nr; ++r) {
    try {
      body(static_cast<std::size_t>(r));
    } catch (...) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Replicate r of every cell shares its seed, so cells differ only in degree
// and edge law (common random numbers across the grid).
Seed replicate_seed(const StudySpec& spec, std::size_t r) { return derive_seed(spec.seed, Stream::kReplicate, r); }

SparseGraph draw_replicate(const StudySpec& spec, double degree, EdgeLaw law, Seed rs, GraphModel* model_out) {
  nlohmann::json doc = spec.model;
  doc["seed"] = derive_seed(rs, Stream::kBlocks, 0);
  doc["mean_degree"] = degree;
  doc["edge_law"] = to_string(law);
  GraphModel model = parse_model_spec(doc).model;
  SparseGraph g = sample(model, derive_seed(rs, Stream::kSample, 0));
  if (model_out) *model_out = std::move(model);
  return g;
}

CvParams replicate_params(const StudySpec& spec, Seed rs) {
  CvParams p = spec.estimator;
  p.seed = derive_seed(rs, Stream::kSplit, 0);
  p.keep_vectors = false;
  return p;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::size_t numerical_rank(const Eigen::MatrixXd& B) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
  lu.setThreshold(1e-10);
  return static_cast<std::size_t>(lu.rank());
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void StudySpec::validate() const {
  if (replicates < 1) throw std::invalid_argument("study: replicates must be at least 1");
  if (degrees.empty()) throw std::invalid_argument("study: degree grid is empty");
  for (std::size_t i = 1; i < degrees.size(); ++i)
    if (!(degrees[i] > degrees[i - 1])) throw std::invalid_argument("study: degree grid must be strictly increasing");
  for (double d : degrees)
    if (!(d > 0.0)) throw std::invalid_argument("study: degrees must be positive");
  if (edge_laws.empty()) throw std::invalid_argument("study: no edge law given");
  if (!model.is_object()) throw std::invalid_argument("study: model must be a JSON object");
}

StudySpec parse_study_spec(const nlohmann::json& doc) {
  try {
    StudySpec s;
    s.model = doc.at("model");
    s.degrees = doc.at("degrees").get<std::vector<double>>();
    if (doc.contains("edge_laws")) {
      s.edge_laws.clear();
      for (const auto& name : doc["edge_laws"]) s.edge_laws.push_back(parse_edge_law(name.get<std::string>()));
    }
    if (doc.contains("estimator")) {
      const auto& e = doc["estimator"];
      CvParams& p = s.estimator;
      p.epsilon = e.value("epsilon", p.epsilon);
      p.k_max = e.value("k_max", p.k_max);
      p.folds = e.value("folds", p.folds);
      p.alpha = e.value("alpha", p.alpha);
      p.bh_correction = e.value("bh_correction", p.bh_correction);
      if (e.contains("matrix")) p.matrix_mode = parse_matrix_mode(e["matrix"].get<std::string>());
    }
    s.replicates = doc.value("replicates", s.replicates);
    s.seed = doc.value("seed", s.seed);
    s.threshold = doc.value("threshold", s.threshold);
    if (doc.contains("components")) s.components = doc["components"].get<std::vector<std::size_t>>();
    if (doc.contains("true_k")) s.true_k = doc["true_k"].get<std::size_t>();
    s.raw_dump = doc.value("raw_dump", false);
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("study document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("study document: ") + e.what());
  }
}

double alpha_hat(double mean_t, double sd_t, double threshold) {
  if (!(sd_t > 0.0)) throw std::invalid_argument("alpha_hat: sd must be positive");
  return 1.0 - normal_cdf((threshold - mean_t) / sd_t);
}

std::size_t eigcv_estimator(const SparseGraph& a, const CvParams& params) { return eigcv(a, params).estimate.k_hat; }

StudyResult calibration_study(const StudySpec& spec) {
  spec.validate();
  for (std::size_t c : spec.components)
    if (c < 2 || c > spec.estimator.k_max)
      throw std::invalid_argument("calibration: reported components must lie in [2, k_max]");
  StudyResult result;
  result.kind = StudyKind::kCalibration;
  const std::size_t nc = spec.components.size();
  for (EdgeLaw law : spec.edge_laws)
    for (double degree : spec.degrees) {
      std::vector<double> t(spec.replicates * nc);
      std::vector<double> secs(spec.replicates);
      for_each_replicate(spec.replicates, [&](std::size_t r) {
        const auto t0 = std::chrono::steady_clock::now();
        const Seed rs = replicate_seed(spec, r);
        GraphModel model;
        const SparseGraph g = draw_replicate(spec, degree, law, rs, &model);
        if (model.B.rows() != 2) throw std::invalid_argument("calibration: model must have two blocks");
        const CvReport rep = eigcv(g, replicate_params(spec, rs));
        for (std::size_t j = 0; j < nc; ++j) t[r * nc + j] = rep.components[spec.components[j] - 2].mean_t;
        secs[r] = seconds_since(t0);
      });

      StudyCell cell;
      cell.degree = degree;
      cell.edge_law = law;
      cell.replicates = spec.replicates;
      for (std::size_t j = 0; j < nc; ++j) {
        std::vector<double> col(spec.replicates);
        std::size_t rejected = 0;
        for (std::size_t r = 0; r < spec.replicates; ++r) {
          col[r] = t[r * nc + j];
          if (col[r] > spec.threshold) ++rejected;
        }
        const Moments m = moments(col);
        ComponentSummary cs;
        cs.index = spec.components[j];
        cs.rejection_rate = static_cast<double>(rejected) / static_cast<double>(spec.replicates);
        cs.mean_t = m.mean;
        cs.sd_t = m.sd;
        cs.alpha_hat = m.sd > 0.0 ? alpha_hat(m.mean, m.sd, spec.threshold) : std::numeric_limits<double>::quiet_NaN();
        cell.components.push_back(cs);
      }
      const Moments w = moments(secs);
      cell.wall_clock_mean = w.mean;
      cell.wall_clock_total = w.mean * static_cast<double>(secs.size());
      if (spec.raw_dump) cell.raw = std::move(t);
      result.cells.push_back(std::move(cell));
    }
  return result;
}

StudyResult accuracy_study(const StudySpec& spec, const Estimator& estimator) {
  spec.validate();
  StudyResult result;
  result.kind = StudyKind::kAccuracy;
  for (EdgeLaw law : spec.edge_laws)
    for (double degree : spec.degrees) {
      std::vector<double> k_hat(spec.replicates);
      std::vector<double> k_true(spec.replicates);
      std::vector<double> secs(spec.replicates);
      for_each_replicate(spec.replicates, [&](std::size_t r) {
        const Seed rs = replicate_seed(spec, r);
        GraphModel model;
        const SparseGraph g = draw_replicate(spec, degree, law, rs, &model);
        k_true[r] = static_cast<double>(spec.true_k ? *spec.true_k : numerical_rank(model.B));
        if (k_true[r] == 0.0) throw std::invalid_argument("accuracy: true dimension must be positive");
        const auto t0 = std::chrono::steady_clock::now();
        k_hat[r] = static_cast<double>(estimator(g, replicate_params(spec, rs)));
        secs[r] = seconds_since(t0);
      });

      StudyCell cell;
      cell.degree = degree;
      cell.edge_law = law;
      cell.replicates = spec.replicates;
      cell.true_k = static_cast<std::size_t>(k_true.front());
      std::vector<double> rel(spec.replicates);
      std::size_t hits = 0;
      for (std::size_t r = 0; r < spec.replicates; ++r) {
        if (k_hat[r] == k_true[r]) ++hits;
        rel[r] = (k_hat[r] - k_true[r]) / k_true[r];
      }
      const Moments m = moments(rel);
      cell.accuracy = static_cast<double>(hits) / static_cast<double>(spec.replicates);
      cell.rel_error_mean = m.mean;
      cell.rel_error_sd = m.sd;
      const Moments w = moments(secs);
      cell.wall_clock_mean = w.mean;
      cell.wall_clock_total = w.mean * static_cast<double>(secs.size());
      if (spec.raw_dump) cell.raw = std::move(k_hat);
      result.cells.push_back(std::move(cell));
    }
  return result;
}

void write_csv(std::ostream& out, const StudyResult& result, bool include_timing) {
  out << "study,degree,edge_law,statistic,component,value\n";
  const char* study = result.kind == StudyKind::kCalibration ? "calibration" : "accuracy";
  for (const auto& c : result.cells) {
    const std::string prefix = std::string(study) + ',' + num(c.degree) + ',' + to_string(c.edge_law) + ',';
    auto row = [&](const char* stat, const std::string& comp, double v) {
      out << prefix << stat << ',' << comp << ',' << num(v) << '\n';
    };
    row("replicates", "", static_cast<double>(c.replicates));
    if (result.kind == StudyKind::kCalibration) {
      for (const auto& s : c.components) {
        const std::string idx = std::to_string(s.index);
        row("rejection_rate", idx, s.rejection_rate);
        row("mean_t", idx, s.mean_t);
        row("sd_t", idx, s.sd_t);
        row("alpha_hat", idx, s.alpha_hat);
      }
    } else {
      row("true_k", "", static_cast<double>(c.true_k));
      row("accuracy", "", c.accuracy);
      row("rel_error_mean", "", c.rel_error_mean);
      row("rel_error_sd", "", c.rel_error_sd);
    }
    if (include_timing) {
      row("wall_clock_mean", "", c.wall_clock_mean);
      row("wall_clock_total", "", c.wall_clock_total);
    }
  }
}

nlohmann::json to_json(const StudyResult& result, bool include_timing) {
  using nlohmann::json;
  json cells = json::array();
  for (const auto& c : result.cells) {
    json cell = {{"degree", c.degree}, {"edge_law", to_string(c.edge_law)}, {"replicates", c.replicates}};
    if (result.kind == StudyKind::kCalibration) {
      json comps = json::array();
      for (const auto& s : c.components)
        comps.push_back({{"index", s.index},
                         {"rejection_rate", s.rejection_rate},
                         {"mean_t", s.mean_t},
                         {"sd_t", s.sd_t},
                         {"alpha_hat", std::isnan(s.alpha_hat) ? json(nullptr) : json(s.alpha_hat)}});
      cell["components"] = std::move(comps);
    } else {
      cell["true_k"] = c.true_k;
      cell["accuracy"] = c.accuracy;
      cell["rel_error_mean"] = c.rel_error_mean;
      cell["rel_error_sd"] = c.rel_error_sd;
    }
    if (include_timing) {
      cell["wall_clock_mean"] = c.wall_clock_mean;
      cell["wall_clock_total"] = c.wall_clock_total;
    }
    if (!c.raw.empty()) cell["raw"] = c.raw;
    cells.push_back(std::move(cell));
  }
  return {{"study", result.kind == StudyKind::kCalibration ? "calibration" : "accuracy"}, {"cells", std::move(cells)}};
}

}  // namespace gdim
