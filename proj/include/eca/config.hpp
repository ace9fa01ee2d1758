#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eca/eval.hpp"
#include "eca/model.hpp"
#include "eca/pipeline.hpp"
#include "eca/synthetic.hpp"

namespace eca {

using Json = nlohmann::json;

struct SweepParams {
  std::vector<std::size_t> ns = {1000, 10000, 100000};
  std::size_t trials = 20;

  bool operator==(const SweepParams&) const = default;
};

struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;
  std::optional<std::string> vocab;
  std::string output;  // path prefix for written files
  FitOptions fit;
  GeneratorSpec generator;
  SweepParams sweep;
  std::uint64_t seed = 0;

  /// Throws Io when an input is missing or the output directory does not exist.
  void validate_paths() const;
};

Json to_json(const FitOptions& o);
FitOptions fit_options_from_json(const Json& j);
Json to_json(const GeneratorSpec& g);
GeneratorSpec generator_spec_from_json(const Json& j);
Json to_json(const RunConfig& c);
RunConfig run_config_from_json(const Json& j);

bool same_fit_options(const FitOptions& a, const FitOptions& b);
bool same_generator_spec(const GeneratorSpec& a, const GeneratorSpec& b);
bool same_run_config(const RunConfig& a, const RunConfig& b);

Json matrix_to_json(const Matrix& m);  // array of rows
Matrix matrix_from_json(const Json& j);

/// Sidecar record for a fit: column order, Z_i, cubic forms, alpha_hat,
/// status flags and diagnostics.
Json to_json(const RecoveryResult& r);
Json to_json(const EvalReport& r);
Json to_json(const SweepResult& s);

}  // namespace eca
