#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "monofit/errors.hpp"
#include "monofit/harness.hpp"
#include "monofit/monotone.hpp"

namespace {

using namespace monofit;

/// Writes `text` to `path`, or to stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) fail(ErrorKind::invalid_argument, "cannot write '" + path + "'");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::invalid_argument, "cannot read '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::invalid_argument, "'" + path + "' is not valid JSON: " + e.what());
  }
}

const std::map<std::string, Profile> kProfiles{{"practical", Profile::practical},
                                               {"theoretical", Profile::theoretical}};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monotone polynomial approximation with interpolatory pointwise estimates"};
  app.require_subcommand(1);

  std::string config_path, run_output;
  auto* run_cmd = app.add_subcommand("run", "Run the corpus experiment described by a JSON config");
  run_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--output", run_output, "Override the config's output path ('-' for stdout)");

  VerifyConfig vcfg;
  std::string verify_format = "csv", verify_output;
  auto* verify_cmd = app.add_subcommand("verify", "Run the lemma verification suite");
  verify_cmd->add_option("--n", vcfg.n_set, "Orders, comma separated")->delimiter(',');
  verify_cmd->add_option("--profile", vcfg.profile, "practical or theoretical")
      ->transform(CLI::CheckedTransformer(kProfiles, CLI::ignore_case));
  verify_cmd->add_option("--seed", vcfg.seed, "Base seed for random splines");
  verify_cmd->add_option("--instances", vcfg.instances, "Random splines per order")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--format", verify_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  verify_cmd->add_option("--output", verify_output, "Output path (stdout by default)");

  CalibrationConfig ccfg;
  std::string calibrate_output;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Estimate the construction constants");
  calibrate_cmd->add_option("--k", ccfg.k, "Spline order")->check(CLI::Range(2, 8));
  calibrate_cmd->add_option("--n", ccfg.n, "Partition order")->check(CLI::Range(4, 1024));
  calibrate_cmd->add_option("--seed", ccfg.seed, "Base seed");
  calibrate_cmd->add_option("--instances", ccfg.instances, "Random splines")->check(CLI::PositiveNumber);
  calibrate_cmd->add_option("--alpha", ccfg.alpha, "Indicator exponent alpha");
  calibrate_cmd->add_option("--profile", ccfg.profile, "practical or theoretical")
      ->transform(CLI::CheckedTransformer(kProfiles, CLI::ignore_case));
  calibrate_cmd->add_option("--output", calibrate_output, "Output path (stdout by default)");

  std::string f_id, emit_path, approx_output;
  int r = 1, n = 24;
  ApproximateConfig acfg;
  auto* approx_cmd = app.add_subcommand("approx", "Approximate one corpus function");
  approx_cmd->add_option("--f", f_id, "Corpus id (x, x2, x3, x5px, exp, xabsx, xabsx3, logistic, w2)")->required();
  approx_cmd->add_option("--r", r, "Smoothness order")->check(CLI::PositiveNumber);
  approx_cmd->add_option("--n", n, "Requested order")->check(CLI::PositiveNumber);
  approx_cmd->add_option("--profile", acfg.profile, "practical or theoretical")
      ->transform(CLI::CheckedTransformer(kProfiles, CLI::ignore_case));
  approx_cmd->add_option("--n-cap", acfg.n_cap, "Largest order tried")->check(CLI::PositiveNumber);
  approx_cmd->add_option("--emit", emit_path, "Write P as Chebyshev coefficients (JSON)");
  approx_cmd->add_option("--output", approx_output, "Report path (stdout by default)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      ExperimentConfig cfg = ExperimentConfig::from_json(read_json(config_path));
      if (!run_output.empty()) cfg.output = run_output;
      const ReportSet report = run(cfg);
      emit(cfg.output, cfg.format == "json" ? report.to_json().dump(2) : report.to_csv());
      return report.all_ok() ? 0 : 1;
    }
    if (verify_cmd->parsed()) {
      const LemmaSuiteReport report = verify_all(vcfg);
      emit(verify_output, verify_format == "json" ? report.to_json().dump(2) : report.to_csv());
      return report.pass() ? 0 : 1;
    }
    if (calibrate_cmd->parsed()) {
      emit(calibrate_output, calibrate(ccfg).to_json().dump(2));
      return 0;
    }
    if (approx_cmd->parsed()) {
      const SmoothFunction f = corpus_function(f_id, r);
      const Approximation a = approximate(f, r, n, acfg);
      if (!emit_path.empty()) {
        const ChebSeries cheb = chebyshev_interpolant(*a.p, a.p->degree());
        const nlohmann::json poly = {{"f_id", f.id},
                                     {"r", r},
                                     {"n", a.report.n_realized},
                                     {"basis", "chebyshev"},
                                     {"domain", {-1.0, 1.0}},
                                     {"degree", cheb.degree()},
                                     {"coefficients", cheb.coeffs()}};
        emit(emit_path, poly.dump());
      }
      emit(approx_output, a.report.to_json().dump(2));
      return a.report.monotone_pass ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return 2;
  }
  return 0;
}
