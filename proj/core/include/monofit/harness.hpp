#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "monofit/indicators.hpp"
#include "monofit/monotone.hpp"
#include "monofit/smoothness.hpp"

namespace monofit {

/// Schema tag written as the first CSV line.
inline constexpr const char* kReportVersion = "# monofit-report v1";

/// A corpus entry: a known function id and the smoothness order used for it.
struct CorpusEntry {
  std::string id;
  int r = 1;
};

/// Closed form of a corpus id, for reports.
std::string corpus_formula(const std::string& id);

/// Known ids: x, x2 (x^2 + 2x), x3, x5px (x^5 + x), exp (normalized e^x), xabsx (x|x|),
/// xabsx3 (x|x|^3), logistic (normalized 1/(1 + e^{-8x})), w2 (x|x|^3/4 + x).
/// Raises invalid-argument for unknown ids or r above what the id supports.
SmoothFunction corpus_function(const std::string& id, int r);

/// Largest r the id supports.
int corpus_max_r(const std::string& id);

std::vector<CorpusEntry> default_corpus();

struct ExperimentConfig {
  std::vector<CorpusEntry> corpus = default_corpus();
  std::vector<int> n_set{24, 48};
  Profile profile = Profile::practical;
  /// Exponent of the Lip* table.
  double alpha = 2.0;
  /// Recorded with the report; the pipeline itself draws no random numbers.
  std::vector<std::uint64_t> seeds{7};
  std::string output;
  /// "csv" or "json".
  std::string format = "csv";
  bool negative_probe = false;
  int n_cap = 192;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// One (f, n) job.
struct RunRow {
  std::string f_id;
  int r = 0;
  int n = 0;
  bool ok = false;
  std::string error;
  ApproximateReport report;
  /// sup |f - P| (sqrt(1-x^2)/n)^{-alpha}.
  double lip_ratio = 0.0;
  /// sup |f - P| / (1-x^2)^{r/2} times n^r.
  double wr_ratio = 0.0;
};

/// sup |f - P| / ((phi/n)^r omega_3(f^(r), phi/n)) for the fixed probe function.
/// Illustrative only: the growth across n is what the probe looks at.
struct ProbeRow {
  std::string f_id;
  int r = 0;
  int n = 0;
  bool ok = false;
  double ratio = 0.0;
  std::string error;
};

/// Id of the probe function (x|x|, r = 1).
inline constexpr const char* kProbeFunction = "xabsx";

struct ReportSet {
  ExperimentConfig config;
  std::vector<RunRow> rows;
  std::vector<std::pair<std::string, std::string>> skipped;
  std::vector<ProbeRow> probe;

  bool all_ok() const;
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// Runs the (corpus x n_set) matrix in parallel.
ReportSet run(const ExperimentConfig& cfg);

struct VerifyConfig {
  std::vector<int> n_set{8, 16, 32};
  Profile profile = Profile::practical;
  std::uint64_t seed = 7;
  /// Random splines per order for the spline-level suites.
  int instances = 20;
};

/// One bound group of the lemma suite.
struct SuiteRow {
  std::string group;
  std::string bound;
  std::vector<int> n;
  std::vector<double> fitted;
  bool stable = false;
  bool pass = false;
  std::string note;
};

struct LemmaSuiteReport {
  std::vector<SuiteRow> rows;

  bool pass() const;
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// Every lemma-level check, one row per bound group.
LemmaSuiteReport verify_all(const VerifyConfig& cfg);

/// Names of the bound groups verify_all always emits, in order (13 groups).
std::vector<std::string> suite_groups();

}  // namespace monofit
