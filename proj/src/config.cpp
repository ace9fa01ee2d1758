#include "eca/config.hpp"

#include <cmath>
#include <filesystem>

#include "eca/error.hpp"

namespace eca {

namespace {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number_or_null(v(i)));
  return a;
}

Json doubles_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number_or_null(x));
  return a;
}

SvdMethod parse_svd_method(const std::string& s) {
  if (s == "dense") return SvdMethod::Dense;
  if (s == "power_iteration") return SvdMethod::PowerIteration;
  fail(ErrorCode::InvalidOptions, "unknown svd method '" + s + "'");
}

TripleEstimator parse_estimator(const std::string& s) {
  if (s == "all-distinct-triples") return TripleEstimator::AllDistinctTriples;
  if (s == "first-three-tokens") return TripleEstimator::FirstThreeTokens;
  fail(ErrorCode::InvalidOptions, "unknown estimator '" + s + "'");
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) return Matrix(0, 0);
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols)
      fail(ErrorCode::InvalidOptions, "ragged matrix in configuration");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

Json to_json(const FitOptions& o) {
  return Json{{"k", o.k},
              {"alpha0", o.alpha0},
              {"seed", o.seed},
              {"svd_method", svd_method_name(o.svd_method)},
              {"theta_retries", o.theta_retries},
              {"clip_normalize", o.clip_normalize},
              {"clip_fraction", o.clip_fraction},
              {"max_iter", o.max_iter},
              {"conv_tol", o.conv_tol},
              {"estimator_mode", estimator_name(o.estimator_mode)},
              {"threads", o.threads},
              {"dense_pairs_cap", o.dense_pairs_cap}};
}

FitOptions fit_options_from_json(const Json& j) {
  FitOptions o;
  o.k = get_or<Eigen::Index>(j, "k", o.k);
  o.alpha0 = get_or<double>(j, "alpha0", o.alpha0);
  o.seed = get_or<std::uint64_t>(j, "seed", o.seed);
  o.svd_method = parse_svd_method(get_or<std::string>(j, "svd_method", svd_method_name(o.svd_method)));
  o.theta_retries = get_or<int>(j, "theta_retries", o.theta_retries);
  o.clip_normalize = get_or<bool>(j, "clip_normalize", o.clip_normalize);
  o.clip_fraction = get_or<double>(j, "clip_fraction", o.clip_fraction);
  o.max_iter = get_or<int>(j, "max_iter", o.max_iter);
  o.conv_tol = get_or<double>(j, "conv_tol", o.conv_tol);
  o.estimator_mode =
      parse_estimator(get_or<std::string>(j, "estimator_mode", estimator_name(o.estimator_mode)));
  o.threads = get_or<int>(j, "threads", o.threads);
  o.dense_pairs_cap = get_or<std::int64_t>(j, "dense_pairs_cap", o.dense_pairs_cap);
  return o;
}

Json to_json(const GeneratorSpec& g) {
  Json factors = Json::array();
  for (const auto& f : g.factors) factors.push_back({{"kind", factor_kind_name(f.kind)}, {"p", f.p}});
  return Json{{"model", generator_model_name(g.model)},
              {"d", g.d},
              {"k", g.k},
              {"o", matrix_to_json(g.o)},
              {"alpha", g.alpha},
              {"topic_concentration", g.topic_concentration},
              {"doc_len", g.doc_len},
              {"n", g.n},
              {"factors", factors},
              {"noise_sigma", g.noise_sigma},
              {"flip_probability", g.flip_probability},
              {"seed", g.seed}};
}

GeneratorSpec generator_spec_from_json(const Json& j) {
  GeneratorSpec g;
  g.model = parse_generator_model(get_or<std::string>(j, "model", generator_model_name(g.model)));
  g.d = get_or<Eigen::Index>(j, "d", g.d);
  g.k = get_or<Eigen::Index>(j, "k", g.k);
  if (j.contains("o")) g.o = matrix_from_json(j.at("o"));
  g.alpha = get_or<std::vector<double>>(j, "alpha", g.alpha);
  g.topic_concentration = get_or<double>(j, "topic_concentration", g.topic_concentration);
  g.doc_len = get_or<std::int64_t>(j, "doc_len", g.doc_len);
  g.n = get_or<std::size_t>(j, "n", g.n);
  if (j.contains("factors"))
    for (const auto& f : j.at("factors"))
      g.factors.push_back({parse_factor_kind(f.at("kind").get<std::string>()), get_or<double>(f, "p", 0.5)});
  g.noise_sigma = get_or<double>(j, "noise_sigma", g.noise_sigma);
  g.flip_probability = get_or<double>(j, "flip_probability", g.flip_probability);
  g.seed = get_or<std::uint64_t>(j, "seed", g.seed);
  return g;
}

Json to_json(const RunConfig& c) {
  Json j{{"command", c.command},
         {"inputs", c.inputs},
         {"output", c.output},
         {"fit", to_json(c.fit)},
         {"generator", to_json(c.generator)},
         {"sweep", {{"ns", c.sweep.ns}, {"trials", c.sweep.trials}}},
         {"seed", c.seed}};
  j["vocab"] = c.vocab ? Json(*c.vocab) : Json(nullptr);
  return j;
}

RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  c.command = get_or<std::string>(j, "command", "");
  c.inputs = get_or<std::vector<std::string>>(j, "inputs", {});
  if (j.contains("vocab") && !j.at("vocab").is_null()) c.vocab = j.at("vocab").get<std::string>();
  c.output = get_or<std::string>(j, "output", "");
  if (j.contains("fit")) c.fit = fit_options_from_json(j.at("fit"));
  if (j.contains("generator")) c.generator = generator_spec_from_json(j.at("generator"));
  if (j.contains("sweep")) {
    c.sweep.ns = get_or<std::vector<std::size_t>>(j.at("sweep"), "ns", c.sweep.ns);
    c.sweep.trials = get_or<std::size_t>(j.at("sweep"), "trials", c.sweep.trials);
  }
  c.seed = get_or<std::uint64_t>(j, "seed", 0);
  return c;
}

bool same_fit_options(const FitOptions& a, const FitOptions& b) { return to_json(a) == to_json(b); }

bool same_generator_spec(const GeneratorSpec& a, const GeneratorSpec& b) {
  return to_json(a) == to_json(b);
}

bool same_run_config(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

void RunConfig::validate_paths() const {
  namespace fs = std::filesystem;
  for (const auto& p : inputs)
    if (!fs::is_regular_file(p)) fail(ErrorCode::Io, "input file '" + p + "' does not exist");
  if (vocab && !fs::is_regular_file(*vocab))
    fail(ErrorCode::Io, "vocab file '" + *vocab + "' does not exist");
  if (!output.empty()) {
    const fs::path parent = fs::path(output).parent_path();
    if (!parent.empty() && !fs::is_directory(parent))
      fail(ErrorCode::Io, "output directory '" + parent.string() + "' does not exist");
  }
}

Json to_json(const RecoveryResult& r) {
  const auto& dg = r.diagnostics;
  Json unreliable = Json::array();
  for (bool u : dg.unreliable) unreliable.push_back(u);
  Json j{{"status", r.status == RecoveryStatus::Complete ? "complete" : "not_all_recovered"},
         {"n_columns", r.columns.size()},
         {"singular_values", doubles_json(r.singular_values)},
         {"scale_estimates", doubles_json(r.scale_estimates)},
         {"skewness_estimates", doubles_json(r.skewness_estimates)},
         {"kurtosis_estimates", doubles_json(r.kurtosis_estimates)},
         {"theta_used", vector_json(r.theta_used)},
         {"diagnostics",
          {{"whitening_residual", number_or_null(dg.whitening_residual)},
           {"min_singular_gap", number_or_null(dg.min_singular_gap)},
           {"theta_attempts", dg.theta_attempts},
           {"dropped_columns", dg.dropped_columns},
           {"unreliable", unreliable},
           {"power_iterations", dg.power_iterations},
           {"power_converged", dg.power_converged},
           {"docs_used", dg.docs_used},
           {"docs_skipped", dg.docs_skipped}}}};
  j["alpha_hat"] = r.alpha_hat ? vector_json(*r.alpha_hat) : Json(nullptr);
  Json order = Json::array();
  for (std::size_t i = 0; i < r.columns.size(); ++i) order.push_back(i);
  j["column_order"] = order;
  return j;
}

Json to_json(const EvalReport& r) {
  Json flips = Json::array();
  for (bool f : r.sign_flips) flips.push_back(f);
  Json j{{"permutation", r.permutation},
         {"sign_flips", flips},
         {"per_column_l2", doubles_json(r.per_column_l2)},
         {"per_column_l1", doubles_json(r.per_column_l1)},
         {"max_l2", r.max_l2},
         {"mean_l2", r.mean_l2},
         {"missing", r.missing}};
  j["alpha_error"] = r.alpha_error ? Json(*r.alpha_error) : Json(nullptr);
  if (r.moment_errors)
    j["moment_errors"] = {{"pairs", r.moment_errors->pairs}, {"triples", r.moment_errors->triples}};
  else
    j["moment_errors"] = nullptr;
  return j;
}

Json to_json(const SweepResult& s) {
  Json rows = Json::array();
  for (const auto& r : s.rows)
    rows.push_back({{"n", r.n},
                    {"median", number_or_null(r.median)},
                    {"q1", number_or_null(r.q1)},
                    {"q3", number_or_null(r.q3)},
                    {"errors", doubles_json(r.errors)}});
  return Json{{"rows", rows}, {"slope", number_or_null(s.slope)},
              {"intercept", number_or_null(s.intercept)}};
}

}  // namespace eca
