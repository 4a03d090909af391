#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "trisre/error.hpp"
#include "trisre/estimate.hpp"
#include "trisre/sre.hpp"
#include "trisre/stationarity.hpp"
#include "trisre/tail_stats.hpp"

namespace trisre {

using Json = nlohmann::ordered_json;

inline constexpr int kConfigSchema = 1;

enum class ReportFormat { Json, Csv };

struct ScenarioConfig {
  std::string name = "scenario";
  TriangularSRE model = IndependentEntries{};
  std::uint64_t samples = 1'000'000;      ///< stationary draws of (W1, W2)
  double tol = 1e-8;                      ///< truncation tolerance of the backward series
  std::uint64_t seed = 1;
  std::uint64_t mc_samples = 1'000'000;   ///< paths per constant estimate
  std::int64_t horizon = 400;             ///< n for M_n, w_n and c_R
  std::int64_t perpetuity_horizon = 400;  ///< n for the Goldie perpetuity formula
  unsigned workers = 0;
  std::filesystem::path out_dir = "out";
  ReportFormat format = ReportFormat::Json;

  /// Throws ConfigError when a count is zero or tol is outside (0, 1).
  void validate() const;
};

/// Predicted P(+-W1 > x) ~ c_+- x^-tail_index (log x)^log_beta.  The
/// constants include the slowly varying factor ell of a regularly varying
/// input, which is constant for the Pareto laws of the menu.
struct AsymptoticPrediction {
  double tail_index = 0.0;
  double log_beta = 0.0;
  EstimateWithError c_plus, c_minus;
  double ell = 1.0;
  TheoremCase source = TheoremCase::Unsupported;
  std::string constant_formula;
  /// Named intermediate values (c2 constants, w, c_R, mu, ...).
  std::vector<std::pair<std::string, EstimateWithError>> components;
};

struct PredictOptions {
  std::uint64_t mc_samples = 1'000'000;
  std::int64_t horizon = 400;
  std::int64_t perpetuity_horizon = 400;
  double tol = 1e-8;
  std::uint64_t seed = 1;
  unsigned workers = 0;
};

/// Dispatches on the classified case.  Throws UnsupportedRegime for
/// Unsupported models.
AsymptoticPrediction predict(const TriangularSRE& model, const PredictOptions& options = {});
AsymptoticPrediction predict(const TriangularSRE& model, const RegimeReport& regime,
                             const PredictOptions& options);

struct Verdict {
  std::string check_id;
  double predicted = 0.0;
  double estimated = 0.0;
  double se = 0.0;
  std::string band;  ///< "+-h" (absolute) or "x[lo,hi]" (ratio estimated/predicted)
  bool pass = false;
  bool gating = true;  ///< counts towards the exit status
  std::string note;
};

/// |estimated - predicted| <= half_width.
Verdict absolute_verdict(std::string id, double predicted, double estimated, double se,
                         double half_width, bool gating, std::string note = {});
/// lo <= estimated / predicted <= hi.
Verdict ratio_verdict(std::string id, double predicted, double estimated, double se, double lo,
                      double hi, bool gating, std::string note = {});

struct SectionError {
  std::string section;
  ErrorCode code = ErrorCode::ArgumentOutOfRange;
  std::string message;
};

struct TailSummary {
  std::optional<EstimateWithError> hill_w2, hill_w1, hill_w1_plus, hill_w1_minus;
  std::size_t hill_k = 0;
  std::optional<LogFactorFit> beta_fit;
  std::vector<double> grid;  ///< percentile grid of |W1|
  std::optional<double> scaled_ccdf_plus, scaled_ccdf_minus;
  std::vector<std::pair<std::string, EstimateWithError>> extra;
};

struct ScenarioReport {
  std::string name;
  ScenarioConfig config;
  RegimeReport regime;
  std::optional<AsymptoticPrediction> prediction;
  std::optional<TruncationPlan> plan;
  TailSummary empirical;
  std::vector<Verdict> verdicts;
  std::vector<SectionError> errors;
  std::vector<std::pair<std::string, double>> runtime_seconds;
  unsigned workers = 0;

  /// Every gating verdict passes and no section failed.
  bool passed() const noexcept;
};

/// classify -> predict -> stationary sampling -> tail estimates -> verdicts.
/// Module errors are recorded per section; the report is always returned.
ScenarioReport run_scenario(const ScenarioConfig& config);

/// Writes <dir>/<name>.json or <dir>/<name>.csv (one row per verdict) and
/// returns the path.  Throws IoError.
std::filesystem::path emit_report(const ScenarioReport& report, ReportFormat format,
                                  const std::filesystem::path& dir);

std::string verdicts_csv(const std::vector<Verdict>& verdicts);

/// The shipped scenarios, one per theorem case.  `quick` shrinks every count.
std::vector<ScenarioConfig> builtin_suite(bool quick = false);

// JSON records.  Parsing throws ConfigError on missing or mistyped fields.

Json to_json(const Distribution& d);
Distribution distribution_from_json(const Json& j);
Json to_json(const TriangularSRE& m);
TriangularSRE model_from_json(const Json& j);
Json to_json(const EstimateWithError& e);
EstimateWithError estimate_from_json(const Json& j);
Json to_json(const RegimeReport& r);
Json to_json(const AsymptoticPrediction& p);
Json to_json(const ScenarioConfig& c);
ScenarioConfig config_from_json(const Json& j);
ScenarioConfig load_config(const std::filesystem::path& path);
Json to_json(const ScenarioReport& r);

std::string_view to_string(ReportFormat f) noexcept;
ReportFormat report_format_from_string(std::string_view s);

}  // namespace trisre
